#include "roboaug/metrics.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace roboaug {

namespace {

struct Terms {
    std::size_t intersection;
    std::size_t union_;
    std::size_t hull;
    std::size_t covered; // |box(pred) | box(gt)|
};

Terms overlap_terms(const BinaryMask& pred, const BinaryMask& gt)
{
    if (pred.dims() != gt.dims())
        throw ValidationError("GIoU needs equal dims, got " + to_string(pred.dims()) + " and " +
                              to_string(gt.dims()));
    const auto counts = kernels::pair_counts(pred.bits(), gt.bits());
    if (counts.union_ == 0)
        throw ValidationError("GIoU is undefined when both masks are empty");
    const auto a = bbox(pred);
    const auto b = bbox(gt);
    if (!a || !b) {
        const std::size_t area = (a ? *a : *b).area();
        return {counts.intersection, counts.union_, area, area};
    }
    const Rect hull{std::min(a->x0, b->x0), std::min(a->y0, b->y0), std::max(a->x1, b->x1), std::max(a->y1, b->y1)};
    const int ix = std::max(0, std::min(a->x1, b->x1) - std::max(a->x0, b->x0));
    const int iy = std::max(0, std::min(a->y1, b->y1) - std::max(a->y0, b->y0));
    const std::size_t both = static_cast<std::size_t>(ix) * static_cast<std::size_t>(iy);
    return {counts.intersection, counts.union_, hull.area(), a->area() + b->area() - both};
}

} // namespace

double giou(const BinaryMask& pred, const BinaryMask& gt)
{
    const Terms t = overlap_terms(pred, gt);
    const double iou = static_cast<double>(t.intersection) / static_cast<double>(t.union_);
    return iou - static_cast<double>(t.hull - t.covered) / static_cast<double>(t.hull);
}

double iou(const BinaryMask& pred, const BinaryMask& gt)
{
    const Terms t = overlap_terms(pred, gt);
    return static_cast<double>(t.intersection) / static_cast<double>(t.union_);
}

GIoUReport mean_giou(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts,
                     std::span<const std::string> ids)
{
    if (preds.size() != gts.size())
        throw ValidationError("mean_giou needs equal lengths, got " + std::to_string(preds.size()) + " and " +
                              std::to_string(gts.size()));
    if (!ids.empty() && ids.size() != preds.size())
        throw ValidationError("mean_giou: id list length does not match");
    if (preds.empty())
        throw ValidationError("mean_giou of an empty list");

    GIoUReport report;
    double sum = 0.0;
    double sum_iou = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        GIoUItem item;
        item.id = ids.empty() ? std::to_string(i) : ids[i];
        try {
            item.giou = giou(preds[i], gts[i]);
            item.iou = iou(preds[i], gts[i]);
            sum += *item.giou;
            sum_iou += *item.iou;
            ++n;
        } catch (const ValidationError& e) {
            item.error = e.what();
            ++report.failures;
        }
        report.per_item.push_back(std::move(item));
    }
    if (n == 0)
        throw ValidationError("GIoU undefined for every item");
    report.mean = sum / static_cast<double>(n);
    report.mean_iou = sum_iou / static_cast<double>(n);
    return report;
}

nlohmann::json to_json(const GIoUReport& report)
{
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : report.per_item) {
        nlohmann::json j{{"id", it.id}};
        j["giou"] = it.giou ? nlohmann::json(*it.giou) : nlohmann::json(nullptr);
        j["iou"] = it.iou ? nlohmann::json(*it.iou) : nlohmann::json(nullptr);
        if (!it.error.empty())
            j["error"] = it.error;
        items.push_back(std::move(j));
    }
    return {{"per_item", items}, {"mean", report.mean}, {"mean_iou", report.mean_iou}, {"failures", report.failures}};
}

double ScoreRubric::finish_max() const
{
    double total = 0.0;
    for (const auto& s : stages)
        total += s.max;
    return total;
}

ScoreRubric ScoreRubric::two_stage()
{
    return {{{"grasp", 3.0}, {"manipulate", 3.0}}};
}

double normalize_cell(std::span<const double> raw_scene_means, double max)
{
    if (!(max > 0.0))
        throw ValidationError("score maximum must be > 0");
    if (raw_scene_means.empty())
        throw ValidationError("no scene scores to normalize");
    for (double v : raw_scene_means)
        if (v < 0.0 || v > max)
            throw ValidationError(fmt::format("score {} outside [0, {}]", v, max));
    const double mean = std::accumulate(raw_scene_means.begin(), raw_scene_means.end(), 0.0) /
                        static_cast<double>(raw_scene_means.size());
    return mean / max;
}

double aggregate_average(std::span<const CellScore> cells)
{
    if (cells.empty())
        throw ValidationError("no cells to aggregate");
    double raw = 0.0;
    double max = 0.0;
    for (const auto& c : cells) {
        if (!(c.max > 0.0))
            throw ValidationError("score maximum must be > 0");
        raw += c.raw_mean;
        max += c.max;
    }
    return raw / max;
}

double success_rate(std::span<const double> per_trial_scores, double threshold)
{
    if (per_trial_scores.empty())
        throw ValidationError("no trials");
    const auto hits = std::count_if(per_trial_scores.begin(), per_trial_scores.end(),
                                    [&](double s) { return s >= threshold; });
    return static_cast<double>(hits) / static_cast<double>(per_trial_scores.size());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, std::size_t line_no)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
}

} // namespace

RawScoreTable RawScoreTable::read_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> col;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            break;
    }
    const auto header = split_csv_line(line);
    for (std::size_t i = 0; i < header.size(); ++i)
        col[trim(header[i])] = i;
    for (const char* need : {"method", "task", "stage", "scene", "raw_mean", "max"})
        if (!col.contains(need))
            throw SchemaError(std::string("raw score CSV lacks column '") + need + "'");

    RawScoreTable table;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(f.size()));
        RawScoreRow row{trim(f[col["method"]]), trim(f[col["task"]]), trim(f[col["stage"]]), trim(f[col["scene"]]),
                        parse_number(trim(f[col["raw_mean"]]), line_no), parse_number(trim(f[col["max"]]), line_no)};
        if (!(row.max > 0.0) || row.raw_mean < 0.0 || row.raw_mean > row.max)
            throw ValidationError("line " + std::to_string(line_no) + ": raw_mean must lie in [0, max] and max > 0");
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty())
        throw SchemaError("raw score CSV has no rows");
    return table;
}

RawScoreTable RawScoreTable::read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_csv(in);
}

const MethodScores* ScoreTableReport::find(std::string_view method) const
{
    for (const auto& m : methods)
        if (m.method == method)
            return &m;
    return nullptr;
}

std::optional<double> ScoreTableReport::cell(std::string_view method, std::string_view task,
                                             std::string_view stage) const
{
    const auto* m = find(method);
    if (!m)
        return std::nullopt;
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].task == task && columns[i].stage == stage)
            return m->cells[i];
    return std::nullopt;
}

ScoreTableReport score_table(const RawScoreTable& table)
{
    ScoreTableReport report;
    auto column_index = [&](const RawScoreRow& r) {
        for (std::size_t i = 0; i < report.columns.size(); ++i)
            if (report.columns[i].task == r.task && report.columns[i].stage == r.stage)
                return i;
        report.columns.push_back({r.task, r.stage});
        return report.columns.size() - 1;
    };

    struct Acc {
        std::vector<double> values;
        double max = 0.0;
    };
    std::vector<std::string> method_order;
    std::map<std::string, std::map<std::size_t, Acc>> acc;
    for (const auto& r : table.rows) {
        const std::size_t c = column_index(r);
        if (!acc.contains(r.method))
            method_order.push_back(r.method);
        auto& a = acc[r.method][c];
        if (!a.values.empty() && a.max != r.max)
            throw ValidationError("method '" + r.method + "', " + r.task + " (" + r.stage +
                                  "): inconsistent max across scenes");
        a.max = r.max;
        a.values.push_back(r.raw_mean);
    }

    for (const auto& method : method_order) {
        MethodScores ms;
        ms.method = method;
        std::vector<CellScore> cells;
        for (std::size_t c = 0; c < report.columns.size(); ++c) {
            const auto it = acc[method].find(c);
            if (it == acc[method].end()) {
                ms.cells.push_back(std::nullopt);
                ms.raw_means.push_back(0.0);
                continue;
            }
            const auto& a = it->second;
            ms.cells.push_back(normalize_cell(a.values, a.max));
            const double raw_mean = std::accumulate(a.values.begin(), a.values.end(), 0.0) /
                                    static_cast<double>(a.values.size());
            ms.raw_means.push_back(raw_mean);
            cells.push_back({raw_mean, a.max});
        }
        ms.average = aggregate_average(cells);
        report.methods.push_back(std::move(ms));
    }
    return report;
}

nlohmann::json to_json(const ScoreTableReport& report)
{
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : report.columns)
        cols.push_back({{"task", c.task}, {"stage", c.stage}});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& m : report.methods) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& c : m.cells)
            cells.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
        rows.push_back({{"method", m.method}, {"cells", cells}, {"raw_means", m.raw_means}, {"average", m.average}});
    }
    return {{"columns", cols}, {"methods", rows}};
}

std::string to_text(const ScoreTableReport& report)
{
    std::size_t name_w = 6;
    for (const auto& m : report.methods)
        name_w = std::max(name_w, m.method.size());
    std::vector<std::size_t> widths;
    std::ostringstream out;
    out << fmt::format("{:<{}}", "method", name_w);
    for (const auto& c : report.columns) {
        widths.push_back(std::max<std::size_t>(6, c.label().size()));
        out << fmt::format(" | {:>{}}", c.label(), widths.back());
    }
    out << fmt::format(" | {:>7}\n", "Average");
    for (const auto& m : report.methods) {
        out << fmt::format("{:<{}}", m.method, name_w);
        for (std::size_t i = 0; i < m.cells.size(); ++i) {
            if (m.cells[i])
                out << fmt::format(" | {:>{}.2f}", *m.cells[i], widths[i]);
            else
                out << fmt::format(" | {:>{}}", "-", widths[i]);
        }
        out << fmt::format(" | {:>7.2f}\n", m.average);
    }
    return out.str();
}

} // namespace roboaug
