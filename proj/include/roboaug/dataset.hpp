#pragma once

#include "roboaug/image.hpp"
#include "roboaug/mask.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace roboaug {

namespace fs = std::filesystem;

/// Per-episode side information. `extra` carries proprioception, actions and
/// anything else verbatim; the library never interprets it.
struct Metadata {
    std::string instruction;
    std::vector<std::string> object_names;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    bool operator==(const Metadata&) const = default;
};

struct Episode {
    std::string id;
    std::vector<Frame> frames;
    Metadata metadata;

    bool operator==(const Episode&) const = default;
};

struct DemoDataset {
    std::vector<Episode> episodes;
    fs::path root;
};

/// Episode-wise equality, ignoring where the datasets live.
bool structurally_equal(const DemoDataset& a, const DemoDataset& b);

/// Canonical meta.json text (two-space indent, key order preserved, trailing newline).
std::string metadata_to_json(const Metadata& meta);
Metadata parse_metadata(std::string_view text, std::string_view episode_id);

/// Lazily materialized view of a dataset directory:
///   root/episodes/<id>/frames/%06d.png
///   root/episodes/<id>/meta.json
/// Opening parses every meta.json and checks frame headers; pixels are decoded
/// only when an episode is requested.
class DatasetReader {
public:
    struct Entry {
        std::string id;
        Metadata metadata;
        std::vector<fs::path> frame_paths;
        fs::path meta_path;
        Dims dims;
    };

    explicit DatasetReader(fs::path root);

    const fs::path& root() const noexcept { return root_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const Entry& entry(std::size_t i) const { return entries_.at(i); }
    Episode episode(std::size_t i) const;

private:
    fs::path root_;
    std::vector<Entry> entries_;
};

DemoDataset load_dataset(const fs::path& root);

struct SaveOptions {
    bool overwrite = false;
};

/// Writes the dataset layout. Refuses a non-empty existing root unless
/// `overwrite` is set. Returns the root.
fs::path save_dataset(const DemoDataset& ds, const fs::path& root, SaveOptions opts = {});
void save_episode(const Episode& ep, const fs::path& episode_dir);
void validate_episode(const Episode& ep);

std::string frame_file_name(std::size_t index);

/// Naive object-name guess from an instruction: the word after each "the" and
/// the word before "to". Off unless a caller opts in.
std::vector<std::string> extract_object_names(std::string_view instruction);

// Annotated segmentation corpus:
//   root/images/<name>.png
//   root/masks/{robot_main,robot_aux,object}/<name>.png
//   root/annotations.json  { "<name>": {"instruction": ..., "descriptions": [...]}, ... }

struct AnnotatedFrame {
    std::string name;
    Frame image;
    BinaryMask robot_main;
    BinaryMask robot_aux;
    BinaryMask object;
    std::string instruction;
    std::vector<std::string> descriptions;

    BinaryMask robot() const { return mask_union(robot_main, robot_aux); }
    bool operator==(const AnnotatedFrame&) const = default;
};

/// Records sorted by name. A missing robot_aux mask reads as all-zero with a
/// warning; missing robot_main/object masks or annotations fail with every
/// offending image listed.
std::vector<AnnotatedFrame> load_roboseg(const fs::path& root);
void save_roboseg(const std::vector<AnnotatedFrame>& records, const fs::path& root);

struct Violation {
    enum class Kind { dimension_mismatch, overlap, missing_instruction };
    Kind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
};

/// Flags mismatched mask dims, robot_main/object overlap above
/// `overlap_threshold` of the robot_main area, and an empty instruction.
ValidationReport validate_annotation(const AnnotatedFrame& rec, double overlap_threshold = 0.01);

} // namespace roboaug
