// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "roboaug/engine.hpp"
#include "roboaug/errors.hpp"
#include "roboaug/image_io.hpp"
#include "support.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sys/wait.h>

using namespace roboaug;
using namespace roboaug::test;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Published {
    const char* method;
    double cells[4];
    double average;
};

// Normalized behavior scores as printed in the reference results table.
constexpr Published published[] = {
    {"No aug", {0.36, 0.29, 0.15, 0.07}, 0.20},
    {"Inpainting", {0.36, 0.34, 0.63, 0.10}, 0.24},
    {"Background", {0.50, 0.54, 0.46, 0.32}, 0.45},
    {"ImageNet", {0.50, 0.52, 0.56, 0.39}, 0.48},
    {"Texture", {0.50, 0.54, 0.63, 0.44}, 0.51},
    {"Engine", {0.56, 0.59, 0.79, 0.58}, 0.62},
};
constexpr const char* columns[4][2] = {
    {"Fold Towel", "grasp"}, {"Fold Towel", "finish"}, {"Put Mouse", "grasp"}, {"Put Mouse", "finish"}};

Outcome table_reproduction()
{
    const auto rep =
        score_table(RawScoreTable::read_csv(fs::path(ROBOAUG_DATA_DIR) / "raw_behavior_scores.csv"));
    int checked = 0;
    std::string bad;
    for (const auto& row : published) {
        const auto* m = rep.find(row.method);
        if (!m)
            return {false, std::string("missing method ") + row.method};
        for (int c = 0; c < 4; ++c) {
            // inconsistent with its own raw scores: 0.21 from the raw table
            if (std::string(row.method) == "Inpainting" && c == 2)
                continue;
            const auto v = rep.cell(row.method, columns[c][0], columns[c][1]);
            ++checked;
            if (!v || std::abs(*v - row.cells[c]) > 0.01 + 1e-9)
                bad += fmt::format(" {}/{}-{}", row.method, columns[c][0], columns[c][1]);
        }
        ++checked;
        if (std::abs(m->average - row.average) > 0.01 + 1e-9)
            bad += fmt::format(" {}/average", row.method);
    }
    if (!bad.empty())
        return {false, "outside +-0.01:" + bad};
    return {true, fmt::format("{} cells and averages within +-0.01 (Inpainting Put Mouse grasp excluded)", checked)};
}

double giou_brute(const BinaryMask& a, const BinaryMask& b)
{
    long inter = 0, uni = 0;
    int bx[2][4] = {{1 << 30, 1 << 30, -1, -1}, {1 << 30, 1 << 30, -1, -1}};
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const bool p[2] = {a.at(x, y) != 0, b.at(x, y) != 0};
            inter += p[0] && p[1];
            uni += p[0] || p[1];
            for (int k = 0; k < 2; ++k)
                if (p[k]) {
                    bx[k][0] = std::min(bx[k][0], x);
                    bx[k][1] = std::min(bx[k][1], y);
                    bx[k][2] = std::max(bx[k][2], x);
                    bx[k][3] = std::max(bx[k][3], y);
                }
        }
    long hull = 0, covered = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            bool in_c = false, in_box = false;
            int cx0 = 1 << 30, cy0 = 1 << 30, cx1 = -1, cy1 = -1;
            for (int k = 0; k < 2; ++k) {
                if (bx[k][2] < 0)
                    continue;
                cx0 = std::min(cx0, bx[k][0]);
                cy0 = std::min(cy0, bx[k][1]);
                cx1 = std::max(cx1, bx[k][2]);
                cy1 = std::max(cy1, bx[k][3]);
                in_box |= x >= bx[k][0] && x <= bx[k][2] && y >= bx[k][1] && y <= bx[k][3];
            }
            in_c = x >= cx0 && x <= cx1 && y >= cy0 && y <= cy1;
            hull += in_c;
            covered += in_c && in_box;
        }
    return static_cast<double>(inter) / uni - static_cast<double>(hull - covered) / hull;
}

Outcome giou_oracle()
{
    double worst = 0.0;
    long pairs = 0;
    auto check = [&](const BinaryMask& a, const BinaryMask& b) {
        if (a.none() && b.none())
            return;
        worst = std::max(worst, std::abs(giou(a, b) - giou_brute(a, b)));
        ++pairs;
    };
    for (int w = 1; w <= 3; ++w)
        for (int h = 1; h <= 3; ++h) {
            const Dims d{w, h};
            const unsigned n = 1U << d.area();
            std::vector<BinaryMask> all;
            for (unsigned bits = 0; bits < n; ++bits) {
                BinaryMask m(d);
                for (std::size_t i = 0; i < d.area(); ++i)
                    m.bits()[i] = (bits >> i) & 1U;
                all.push_back(std::move(m));
            }
            for (const auto& a : all)
                for (const auto& b : all)
                    check(a, b);
        }
    Rng rng(2024);
    for (int t = 0; t < 10000; ++t) {
        const Dims d{1 + static_cast<int>(rng.uniform_index(8)), 1 + static_cast<int>(rng.uniform_index(8))};
        check(random_mask(d, rng, rng.uniform01()), random_mask(d, rng, rng.uniform01()));
    }
    return {worst <= 1e-12, fmt::format("{} pairs, max deviation {:.3g}", pairs, worst)};
}

Outcome compositor_invariants()
{
    Rng rng(31);
    long violations = 0, pixels = 0;
    const int triples = 2000;
    for (int t = 0; t < triples; ++t) {
        const Dims d{1 + static_cast<int>(rng.uniform_index(32)), 1 + static_cast<int>(rng.uniform_index(32))};
        const Frame f = random_frame(d, rng), b = random_frame(d, rng);
        const BinaryMask m = random_mask(d, rng, rng.uniform01());
        const Frame out = composite(f, m, b);
        for (int y = 0; y < d.height; ++y)
            for (int x = 0; x < d.width; ++x, ++pixels)
                violations += out.at(x, y) != (m.at(x, y) ? f.at(x, y) : b.at(x, y));
    }
    return {violations == 0, fmt::format("{} triples, {} pixels, {} violations", triples, pixels, violations)};
}

Outcome determinism()
{
    TempDir dir("acceptance-det");
    const auto fx = make_fixture_episode("episode_000", 10, {32, 24}, 5);
    write_fixture_dataset(dir / "in", {fx});
    write_asset_pool(dir / "assets");
    const auto gt = std::make_shared<const GroundTruthIndex>(GroundTruthIndex::from_dataset(dir / "in"));

    std::string report;
    bool ok = true;
    for (auto m : {AugMethod::engine, AugMethod::background, AugMethod::imagenet, AugMethod::texture,
                   AugMethod::inpainting, AugMethod::none}) {
        std::set<std::string> hashes;
        for (std::size_t batch : {1, 4, 32})
            for (int rep = 0; rep < 2; ++rep) {
                EngineConfig cfg;
                cfg.aug.method = m;
                cfg.aug.seed = 77;
                cfg.batch_size = batch;
                cfg.prompts.prompts = {"a wooden desk", "a kitchen counter"};
                if (m == AugMethod::texture || m == AugMethod::imagenet)
                    cfg.asset_pool = dir / "assets";
                if (m == AugMethod::inpainting)
                    cfg.aug.proposals.kind = ProposalDescriptor::Kind::passthrough;
                cfg.output = dir / "out";
                cfg.overwrite = true;
                Engine(cfg, gt).augment_dataset(dir / "in");
                hashes.insert(tree_hash(dir / "out"));
            }
        ok = ok && hashes.size() == 1;
        report += fmt::format(" {}:{}", to_string(m), hashes.size() == 1 ? "same" : "DIFFERS");
    }
    return {ok, "6 methods x batch {1,4,32} x 2 runs:" + report};
}

Outcome passthrough_eval()
{
    TempDir dir("acceptance-seg");
    save_roboseg(make_annotated(5, {40, 30}, 12), dir.path());
    const std::string out = (dir / "report.json").string();
    const std::string cmd = std::string(ROBOAUG_CLI) + " eval-seg --backend passthrough --data " +
                            dir.path().string() + " --out " + out;
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        return {false, "eval-seg exited with " + std::to_string(status)};
    const auto bytes = read_file(out);
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    const double mean = j["mean"];
    return {mean == 1.0 && j["per_item"].size() == 5, fmt::format("5 images, mean GIoU {}", mean)};
}

Outcome round_trip()
{
    TempDir dir("acceptance-rt");
    DemoDataset ds;
    for (int e = 0; e < 3; ++e)
        ds.episodes.push_back(make_fixture_episode("ep" + std::to_string(e), 4, {20, 14}, 40 + e).episode);
    save_dataset(ds, dir / "a");
    const auto loaded = load_dataset(dir / "a");
    save_dataset(loaded, dir / "b");
    const bool same = tree_hash(dir / "a") == tree_hash(dir / "b") && structurally_equal(ds, loaded);
    return {same, "save/load/save tree hashes " + std::string(same ? "equal" : "differ")};
}

Outcome scale_plans()
{
    const auto mixed = scale_plan(50, 2, true, 1);
    const auto originals = std::count_if(mixed.episodes.begin(), mixed.episodes.end(),
                                         [](const ScaleEntry& e) { return !e.augmented; });
    const bool ok = mixed.episodes.size() == 100 && originals == 50 && mixed.train_epochs == 700 &&
                    scale_plan(50, 1, false, 1).train_epochs == 1000 &&
                    scale_plan(50, 4, false, 1).train_epochs == 400 && scale_plan(50, 6, false, 1).train_epochs == 300;
    return {ok, fmt::format("2x mix: {} entries, {} original, {} epochs; 1x/4x/6x epochs {}/{}/{}",
                            mixed.episodes.size(), originals, mixed.train_epochs, epochs_for_factor(1),
                            epochs_for_factor(4), epochs_for_factor(6))};
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"AC1 table reproduction", table_reproduction},
        {"AC2 GIoU oracle equivalence", giou_oracle},
        {"AC3 compositor invariants", compositor_invariants},
        {"AC4 determinism and batching invariance", determinism},
        {"AC5 passthrough end-to-end", passthrough_eval},
        {"AC6 dataset round trip", round_trip},
        {"AC7 scale plan", scale_plans},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome r;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            r = check();
        } catch (const std::exception& e) {
            r = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), secs);
        failed += !r.pass;
    }
    std::printf("INFO AC8 not reproducible at desk scale: model GIoU scores, real-robot success rates and "
                "absolute per-frame timings need trained weights, GPUs or robots; eval-seg, score and bench "
                "implement the protocols instead\n");
    return failed == 0 ? 0 : 1;
}
