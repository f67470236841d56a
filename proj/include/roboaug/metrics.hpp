#pragma once

#include "roboaug/mask.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roboaug {

// ---- segmentation scores ---------------------------------------------------

/// Mask GIoU: mask IoU - |C \ (box(pred) | box(gt))| / |C|, C the tightest
/// box around both supports. The penalty uses the two bounding boxes so that
/// giou(A, A) = 1 for any nonempty A; on filled rectangles this is box GIoU.
/// Throws ValidationError when both masks are empty.
double giou(const BinaryMask& pred, const BinaryMask& gt);
double iou(const BinaryMask& pred, const BinaryMask& gt);

struct GIoUItem {
    std::string id;
    std::optional<double> giou;
    std::optional<double> iou;
    std::string error;
};

struct GIoUReport {
    std::vector<GIoUItem> per_item;
    double mean = 0.0;
    double mean_iou = 0.0;
    std::size_t failures = 0;
};

/// Per-item scores and their arithmetic mean. Items whose score is undefined
/// are reported as failures and left out of the mean.
GIoUReport mean_giou(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts,
                     std::span<const std::string> ids = {});

nlohmann::json to_json(const GIoUReport& report);

// ---- behavior scores -------------------------------------------------------

struct ScoreStage {
    std::string name;
    double max = 3.0;
};

/// Per-stage maxima; a "finish" score sums all stages.
struct ScoreRubric {
    std::vector<ScoreStage> stages;

    double finish_max() const;
    /// Grasp + manipulation stage, each scored 0..3.
    static ScoreRubric two_stage();
};

double normalize_cell(std::span<const double> raw_scene_means, double max);

struct CellScore {
    double raw_mean = 0.0;
    double max = 1.0;
};

/// Sum of raw means over sum of maxima.
double aggregate_average(std::span<const CellScore> cells);

/// Fraction of trials scoring at least `threshold`.
double success_rate(std::span<const double> per_trial_scores, double threshold = 2.0);

struct RawScoreRow {
    std::string method;
    std::string task;
    std::string stage;
    std::string scene;
    double raw_mean = 0.0;
    double max = 0.0;
};

/// CSV with header columns method,task,stage,scene,raw_mean,max (any order).
struct RawScoreTable {
    std::vector<RawScoreRow> rows;

    static RawScoreTable read_csv(std::istream& in);
    static RawScoreTable read_csv(const std::filesystem::path& path);
};

struct ScoreColumn {
    std::string task;
    std::string stage;
    std::string label() const { return task + " (" + stage + ")"; }
};

struct MethodScores {
    std::string method;
    std::vector<std::optional<double>> cells;
    std::vector<double> raw_means;
    double average = 0.0;
};

struct ScoreTableReport {
    std::vector<ScoreColumn> columns;
    std::vector<MethodScores> methods;

    const MethodScores* find(std::string_view method) const;
    std::optional<double> cell(std::string_view method, std::string_view task, std::string_view stage) const;
};

/// Normalized cell per (method, task, stage) and the max-weighted average per
/// method. Rows keep first-seen order.
ScoreTableReport score_table(const RawScoreTable& table);

nlohmann::json to_json(const ScoreTableReport& report);
std::string to_text(const ScoreTableReport& report);

} // namespace roboaug
