#pragma once

#include "roboaug/dataset.hpp"
#include "roboaug/image.hpp"
#include "roboaug/mask.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace roboaug {

/// Prompt used for every robot query.
inline constexpr std::string_view robot_prompt = "robot";

enum class SegMode { semantic };

struct SegRequest {
    const Frame& image;
    std::string prompt;
    SegMode mode = SegMode::semantic;
};

/// Which segmentation backend to use and how to reach it.
///
/// Textual form (CLI and config files):
///   external:http://host:port[/prefix][?k=v&...]   model server speaking the JSON protocol
///   passthrough                           ground-truth lookup, for testing
///   chroma[:R,G,B[:TOL]]                  color key, default 0,255,0 and 40
///
/// External params: timeout_ms (30000), concurrent (false), batch (true),
/// exchange (b64 | path), exchange_dir.
struct BackendDescriptor {
    enum class Kind { external, passthrough, chroma_key };

    Kind kind = Kind::passthrough;
    std::string endpoint;
    std::map<std::string, std::string> params;

    static BackendDescriptor parse(std::string_view text);
    std::string to_string() const;
    /// endpoint is required iff kind is external.
    void validate() const;
};

/// Ground truth keyed by frame content, backing the passthrough backend.
class GroundTruthIndex {
public:
    struct Entry {
        BinaryMask robot;
        BinaryMask object;
        std::vector<BinaryMask> proposals;
    };

    void add(const Frame& frame, Entry entry);
    const Entry* find(const Frame& frame) const;
    std::size_t size() const noexcept { return entries_.size(); }

    /// robot = robot_main | robot_aux; object = object mask.
    static GroundTruthIndex from_roboseg(std::span<const AnnotatedFrame> records);

    /// Reads the optional per-episode mask tree of a dataset:
    ///   episodes/<id>/masks/robot/%06d.png
    ///   episodes/<id>/masks/object/%06d.png      (absent = empty)
    ///   episodes/<id>/masks/proposals/%06d_%02d.png
    /// Episodes without masks/robot are skipped.
    static GroundTruthIndex from_dataset(const std::filesystem::path& root);

private:
    std::unordered_map<std::string, Entry> entries_;
};

/// Writes one frame's ground truth in the from_dataset layout.
void write_ground_truth(const std::filesystem::path& episode_dir, std::size_t frame_index,
                        const GroundTruthIndex::Entry& entry);

class Segmenter {
public:
    virtual ~Segmenter() = default;

    virtual BinaryMask segment(const SegRequest& req) = 0;

    /// One mask per frame, same prompt. Batching only changes transport.
    virtual std::vector<BinaryMask> segment_batch(std::span<const Frame> frames, std::string_view prompt);

    virtual std::string name() const = 0;
};

std::unique_ptr<Segmenter> make_segmenter(const BackendDescriptor& desc,
                                          std::shared_ptr<const GroundTruthIndex> ground_truth = nullptr);

/// Runs the backend and checks the result against the request.
BinaryMask segment(Segmenter& backend, const SegRequest& req);

/// Per-frame masks in input order, independent of batch_size. Errors name
/// frames counting from `first_index`.
std::vector<BinaryMask> segment_video(Segmenter& backend, std::span<const Frame> frames, std::string_view prompt,
                                      std::size_t batch_size, std::size_t first_index = 0);

/// F = robot mask | masks of every named object.
BinaryMask robot_foreground(const Frame& frame, Segmenter& robot, Segmenter& objects,
                            std::span<const std::string> object_names);

/// Foreground = pixels whose max-channel distance to `key` exceeds `tolerance`.
BinaryMask chroma_key_segment(const Frame& frame, Rgb key, int tolerance);

} // namespace roboaug
