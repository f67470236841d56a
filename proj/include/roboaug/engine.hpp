#pragma once

#include "roboaug/compositor.hpp"
#include "roboaug/dataset.hpp"
#include "roboaug/metrics.hpp"
#include "roboaug/segmentation.hpp"
#include "roboaug/strategies.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roboaug {

namespace fs = std::filesystem;

struct EngineConfig {
    BackendDescriptor robo_seg;
    BackendDescriptor obj_seg;
    AugConfig aug;
    std::size_t batch_size = 1;
    /// Scene descriptions; `prompts` wins over `prompt_pool` when non-empty.
    fs::path prompt_pool;
    PromptPool prompts;
    std::optional<fs::path> asset_pool;
    fs::path output;
    /// Episode-level workers; 0 leaves the OpenMP default.
    int workers = 0;
    /// Guess object names from the instruction when metadata lists none.
    bool extract_object_names = false;
    bool overwrite = false;
    /// Keep the staging tree on failure and skip finished episodes next run.
    bool resume = false;

    void validate() const;
};

struct FrameKey {
    std::string episode_id;
    std::size_t index = 0;
};

/// The augmentation pipeline: segment robot and task objects, synthesize a
/// background with the configured strategy, composite the foreground back.
class Engine {
public:
    explicit Engine(EngineConfig cfg, std::shared_ptr<const GroundTruthIndex> ground_truth = nullptr);
    /// Custom segmenters, e.g. in-process models.
    Engine(EngineConfig cfg, std::unique_ptr<Segmenter> robot, std::unique_ptr<Segmenter> objects,
           std::shared_ptr<const GroundTruthIndex> ground_truth = nullptr);
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const EngineConfig& config() const noexcept { return cfg_; }

    AugFrame gen_image(const Frame& frame, std::span<const std::string> object_names, const FrameKey& key = {});

    /// Equal to gen_image per frame, for any batch size.
    std::vector<AugFrame> gen_video(std::span<const Frame> frames, std::span<const std::string> object_names,
                                    std::string_view episode_id = {});

    Episode augment_episode(const Episode& ep);

    /// Augments every episode and writes the result to config().output via a
    /// staging directory renamed into place once complete.
    DemoDataset augment_dataset(const DemoDataset& ds);
    /// Streaming variant that reads episodes lazily from `input`; meta.json
    /// files are copied byte-for-byte.
    fs::path augment_dataset(const fs::path& input);

private:
    struct Backends;

    std::vector<AugFrame> run(std::span<const Frame> frames, std::span<const std::string> object_names,
                              std::string_view episode_id, std::size_t first_index);
    std::vector<std::string> names_for(const Metadata& meta) const;
    fs::path staging_dir() const;
    void prepare_staging(const fs::path& staging) const;
    void publish(const fs::path& staging) const;

    EngineConfig cfg_;
    std::shared_ptr<const GroundTruthIndex> ground_truth_;
    std::unique_ptr<Backends> backends_;
};

// ---- scaling experiments ----------------------------------------------------

struct ScaleEntry {
    std::size_t source_id = 0;
    std::size_t copy_index = 0;
    std::uint64_t seed = 0;
    bool augmented = true;
};

struct ScalePlan {
    int factor = 1;
    bool mix = false;
    std::vector<ScaleEntry> episodes;
    int train_epochs = 0;
};

/// Training epochs keeping total steps comparable: 1x 1000, 2x 700, 4x 400,
/// 6x 300; other factors round(1000 / factor) with a warning.
int epochs_for_factor(int factor);

/// factor N without mix: N augmented copies of each demo. With mix: the
/// originals plus N-1 augmented copies.
ScalePlan scale_plan(std::size_t n_demos, int factor, bool mix, std::uint64_t base_seed);
nlohmann::json to_json(const ScalePlan& plan);

// ---- benchmarking & evaluation ----------------------------------------------

struct BenchResult {
    std::string method;
    std::size_t frames = 0;
    double mean_sec = 0.0;
    double stddev_sec = 0.0;
};

struct BenchReport {
    std::vector<BenchResult> results;
};

/// Wall-clock seconds per frame for each method, batch size 1. Needs at least
/// 10 frames.
BenchReport bench(const EngineConfig& base, std::span<const AugMethod> methods, std::span<const Frame> frames,
                  std::span<const std::string> object_names,
                  std::shared_ptr<const GroundTruthIndex> ground_truth = nullptr);
nlohmann::json to_json(const BenchReport& report);

/// Segments every annotated image with the robot prompt and scores it against
/// robot_main | robot_aux.
GIoUReport eval_seg(const BackendDescriptor& backend, const fs::path& annotated_root);

} // namespace roboaug
