#pragma once

#include "roboaug/image.hpp"
#include "roboaug/kernels.hpp"
#include "roboaug/mask.hpp"
#include "roboaug/rng.hpp"
#include "roboaug/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roboaug {

namespace fs = std::filesystem;

// ---- prompt pool -----------------------------------------------------------

struct PromptPool {
    std::vector<std::string> prompts;
};

/// One prompt per non-blank line (UTF-8), order preserved; trailing CR is stripped.
PromptPool load_prompt_pool(const fs::path& path);
void save_prompt_pool(const PromptPool& pool, const fs::path& path);

/// Uniform draw driven only by `rng`.
const std::string& sample_prompt(const PromptPool& pool, Rng& rng);

// ---- asset pools -----------------------------------------------------------

/// Texture or photo collection used as replacement backgrounds. Decoded images
/// are cached; the pool is safe to share between threads.
class AssetPool {
public:
    enum class Kind { texture, image };

    AssetPool(Kind kind, std::vector<fs::path> entries);
    /// Every .png/.jpg/.jpeg file directly under `dir`, sorted by name.
    static AssetPool from_directory(Kind kind, const fs::path& dir);

    Kind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const fs::path& entry(std::size_t i) const { return entries_.at(i); }

    /// Throws ValidationError naming the asset when it cannot be decoded.
    std::shared_ptr<const Frame> load(std::size_t i) const;

private:
    struct Cache;

    Kind kind_;
    std::vector<fs::path> entries_;
    std::shared_ptr<Cache> cache_;
};

/// Scales `src` uniformly (times `extra_scale`) so it covers `dims`, then
/// center-crops. Nearest mode samples floor(x / scale).
Frame cover_crop(const Frame& src, Dims dims, Resample mode, double extra_scale = 1.0);

struct TextureOptions {
    Resample resample = Resample::bilinear;
    /// Extra zoom drawn uniformly from [1, 1 + scale_jitter].
    double scale_jitter = 0.0;
};

Frame gen_background_texture(const AssetPool& pool, Dims dims, Rng& rng, TextureOptions opts = {});
Frame gen_background_image(const AssetPool& pool, Dims dims, Rng& rng, Resample mode = Resample::bilinear);

// ---- generative backends ---------------------------------------------------

/// Textual form: "procedural" or "external:http://host:port[?k=v&...]".
struct GenBackendDescriptor {
    enum class Kind { background_diffusion, scene_diffusion, inpaint_diffusion, procedural };

    Kind kind = Kind::procedural;
    std::string endpoint;
    std::map<std::string, std::string> params;

    /// `external_kind` is the kind assigned to an external endpoint.
    static GenBackendDescriptor parse(std::string_view text, Kind external_kind);
    void validate() const;
};

/// Image generator. The procedural implementation needs no model: it renders
/// a seeded value-noise wall/table scene whose layout follows the foreground.
class Generator {
public:
    virtual ~Generator() = default;

    /// Foreground-conditioned background.
    virtual Frame background(const Frame& frame, const BinaryMask& foreground, std::string_view prompt,
                             std::uint64_t seed) = 0;
    /// Text-only scene.
    virtual Frame scene(std::string_view prompt, Dims dims, std::uint64_t seed) = 0;
    /// Frame with `region` regenerated.
    virtual Frame inpaint(const Frame& frame, const BinaryMask& region, std::string_view prompt,
                          std::uint64_t seed) = 0;

    virtual GenBackendDescriptor::Kind kind() const = 0;
};

std::unique_ptr<Generator> make_generator(const GenBackendDescriptor& desc);

/// Scene parameters the procedural backend derives for a prompt and seed;
/// a foreground, when given, moves the table edge and perturbs the seed.
NoiseScene procedural_scene(std::string_view prompt, Dims dims, std::uint64_t seed,
                            const BinaryMask* foreground = nullptr);

Frame gen_background_engine(const Frame& frame, const BinaryMask& foreground, std::string_view prompt,
                            Generator& backend, Rng& rng);
Frame gen_background_scene(std::string_view prompt, Dims dims, Generator& backend, Rng& rng);

// ---- inpainting ------------------------------------------------------------

/// Source of whole-scene object proposals.
///   external:URI   POST <URI>/proposals {"image_b64"} -> {"masks_b64": [...]}
///   passthrough    stored proposals from the ground-truth index
///   grid[:N]       N x N tiles of the frame (default 4)
struct ProposalDescriptor {
    enum class Kind { external, passthrough, grid };

    Kind kind = Kind::grid;
    std::string endpoint;
    int cells = 4;
    std::map<std::string, std::string> params;

    static ProposalDescriptor parse(std::string_view text);
};

class ProposalSource {
public:
    virtual ~ProposalSource() = default;
    virtual std::vector<BinaryMask> propose(const Frame& frame) = 0;
};

std::unique_ptr<ProposalSource> make_proposal_source(const ProposalDescriptor& desc,
                                                     std::shared_ptr<const GroundTruthIndex> ground_truth = nullptr);

/// Proposals sorted by area (largest first), ties by top-left-most bounding
/// box; empty proposals are dropped.
std::vector<BinaryMask> region_proposals(ProposalSource& source, const Frame& frame);

struct InpaintOptions {
    std::size_t count = 5;
    /// Max share of a proposal's area that may overlap the foreground.
    double overlap_threshold = 0.05;
};

/// Indices of the proposals chosen for inpainting: task-irrelevant ones,
/// largest first, at most `count`.
std::vector<std::size_t> select_inpaint_targets(const BinaryMask& foreground, std::span<const BinaryMask> proposals,
                                                InpaintOptions opts);

/// Regenerates the chosen proposal regions (minus the foreground). Pixels
/// outside that region are returned untouched.
Frame inpaint_augment(const Frame& frame, const BinaryMask& foreground, std::span<const BinaryMask> proposals,
                      Generator& backend, Rng& rng, InpaintOptions opts = {}, std::string_view prompt = {});

// ---- configuration -----------------------------------------------------------

enum class AugMethod { engine, background, imagenet, texture, inpainting, none };
enum class BackgroundScope { per_frame, per_episode };

AugMethod parse_aug_method(std::string_view text);
std::string_view to_string(AugMethod m);
BackgroundScope parse_background_scope(std::string_view text);
std::string_view to_string(BackgroundScope s);

struct AugConfig {
    AugMethod method = AugMethod::engine;
    std::uint64_t seed = 0;
    BackgroundScope background_scope = BackgroundScope::per_frame;
    int dilate_radius = 0;
    int feather_radius = 0;
    std::size_t inpaint_count = 5;
    double inpaint_overlap = 0.05;
    Resample resample = Resample::bilinear;
    double texture_scale_jitter = 0.0;
    GenBackendDescriptor generator;
    ProposalDescriptor proposals;

    void validate() const;
};

} // namespace roboaug
