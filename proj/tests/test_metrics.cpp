#include "roboaug/errors.hpp"
#include "roboaug/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace roboaug;
using namespace roboaug::test;

namespace {

// Direct evaluation: counts and boxes by scanning every pixel.
struct Box {
    int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
    void add(int x, int y)
    {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

double giou_oracle(const BinaryMask& a, const BinaryMask& b)
{
    long inter = 0, uni = 0;
    Box ba, bb, c;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const bool pa = a.at(x, y), pb = b.at(x, y);
            inter += pa && pb;
            uni += pa || pb;
            if (pa)
                ba.add(x, y);
            if (pb)
                bb.add(x, y);
            if (pa || pb)
                c.add(x, y);
        }
    long hull = 0, covered = 0;
    for (int y = c.y0; y <= c.y1; ++y)
        for (int x = c.x0; x <= c.x1; ++x) {
            ++hull;
            covered += ba.contains(x, y) || bb.contains(x, y);
        }
    return static_cast<double>(inter) / uni - static_cast<double>(hull - covered) / hull;
}

BinaryMask mask_from_bits(Dims d, unsigned bits)
{
    BinaryMask m(d);
    for (std::size_t i = 0; i < d.area(); ++i)
        m.bits()[i] = (bits >> i) & 1U;
    return m;
}

} // namespace

TEST_CASE("giou examples")
{
    const Dims d{4, 4};
    const auto sq = rect_mask(d, 1, 1, 3, 3);
    CHECK(giou(sq, sq) == 1.0);
    CHECK(giou(rect_mask(d, 0, 0, 2, 4), rect_mask(d, 2, 0, 4, 4)) == 0.0);
    CHECK(giou(rect_mask(d, 0, 0, 1, 1), rect_mask(d, 3, 3, 4, 4)) == -0.875);
    CHECK_THROWS_AS(giou(BinaryMask(d), BinaryMask(d)), ValidationError);
    CHECK_THROWS_AS(giou(sq, BinaryMask({4, 5})), ValidationError);
    // an empty prediction against a nonempty truth is defined
    CHECK(giou(BinaryMask(d), sq) == 0.0);
    CHECK(giou(BinaryMask(d), mask_union(rect_mask(d, 0, 0, 1, 1), rect_mask(d, 3, 3, 4, 4))) == 0.0);
    // identical masks score 1 whatever their shape
    const auto ell = mask_union(rect_mask(d, 0, 0, 1, 4), rect_mask(d, 0, 3, 4, 4));
    CHECK(giou(ell, ell) == 1.0);
    CHECK(iou(ell, ell) == 1.0);
}

TEST_CASE("giou matches the oracle on every pair up to 3x3")
{
    double worst = 0.0;
    std::size_t pairs = 0;
    for (int w = 1; w <= 3; ++w)
        for (int h = 1; h <= 3; ++h) {
            const Dims d{w, h};
            const unsigned n = 1U << d.area();
            for (unsigned x = 0; x < n; ++x)
                for (unsigned y = 0; y < n; ++y) {
                    if (x == 0 && y == 0)
                        continue;
                    const auto a = mask_from_bits(d, x), b = mask_from_bits(d, y);
                    worst = std::max(worst, std::abs(giou(a, b) - giou_oracle(a, b)));
                    ++pairs;
                }
        }
    CHECK(pairs > 260000);
    CHECK(worst <= 1e-12);
}

TEST_CASE("giou properties on random masks")
{
    Rng rng(61);
    for (int t = 0; t < 10000; ++t) {
        const Dims d{1 + static_cast<int>(rng.uniform_index(8)), 1 + static_cast<int>(rng.uniform_index(8))};
        const auto a = random_mask(d, rng, rng.uniform01());
        const auto b = random_mask(d, rng, rng.uniform01());
        if (a.none() && b.none())
            continue;
        const double g = giou(a, b);
        CHECK(std::abs(g - giou_oracle(a, b)) <= 1e-12);
        CHECK(g == giou(b, a));
        CHECK(g <= iou(a, b));
        CHECK(g > -1.0);
        CHECK(g <= 1.0);
        if (!a.none())
            CHECK(giou(a, a) == 1.0);
    }
}

TEST_CASE("giou equals iou when the union fills its box")
{
    const Dims d{6, 6};
    const auto a = rect_mask(d, 0, 0, 4, 3), b = rect_mask(d, 0, 3, 4, 6);
    CHECK(giou(a, b) == iou(a, b));
    const auto c = rect_mask(d, 1, 1, 5, 5), e = rect_mask(d, 2, 2, 4, 4);
    CHECK(giou(c, e) == iou(c, e));
    CHECK(iou(c, e) == 0.25);
}

TEST_CASE("mean_giou")
{
    const Dims d{4, 4};
    const auto sq = rect_mask(d, 0, 0, 2, 2);
    const auto shifted = rect_mask(d, 1, 0, 3, 2);
    // perfect pair 1.0; shifted pair: I = 2, U = 6, C = 6 -> 1/3
    const std::vector<BinaryMask> preds{sq, sq}, gts{sq, shifted};
    const auto rep = mean_giou(preds, gts);
    CHECK(rep.per_item.size() == 2);
    CHECK(rep.mean == doctest::Approx((1.0 + 1.0 / 3.0) / 2.0).epsilon(1e-15));
    CHECK(rep.failures == 0);
    CHECK(rep.per_item[1].id == "1");

    const std::vector<BinaryMask> none;
    CHECK_THROWS_AS(mean_giou(none, none), ValidationError);
    CHECK_THROWS_AS(mean_giou(preds, std::span(gts).first(1)), ValidationError);

    // both-empty items are failures left out of the mean
    const std::vector<BinaryMask> p2{BinaryMask(d), sq}, g2{BinaryMask(d), sq};
    const std::vector<std::string> ids{"a", "b"};
    const auto rep2 = mean_giou(p2, g2, ids);
    CHECK(rep2.failures == 1);
    CHECK_FALSE(rep2.per_item[0].giou.has_value());
    CHECK(rep2.per_item[0].id == "a");
    CHECK(rep2.mean == 1.0);
    const auto j = to_json(rep2);
    CHECK(j["per_item"][0]["giou"].is_null());
    CHECK(j["mean"] == 1.0);
}

TEST_CASE("normalize_cell examples")
{
    const std::vector<double> no_aug_ft_grasp{0.875, 1.125, 1.25, 1.125};
    CHECK(normalize_cell(no_aug_ft_grasp, 3.0) == doctest::Approx(0.3646).epsilon(1e-3));
    CHECK(std::abs(normalize_cell(no_aug_ft_grasp, 3.0) - 0.36) <= 0.01);
    const std::vector<double> zeros{0, 0, 0};
    CHECK(normalize_cell(zeros, 3.0) == 0.0);
    const std::vector<double> ours_pm_finish{3.875, 3.125};
    CHECK(std::abs(normalize_cell(ours_pm_finish, 6.0) - 0.58) <= 0.01);
    CHECK(normalize_cell(ours_pm_finish, 6.0) == doctest::Approx(7.0 / 12.0));

    const std::vector<double> over{3.5};
    CHECK_THROWS_AS(normalize_cell(over, 3.0), ValidationError);
    CHECK_THROWS_AS(normalize_cell(zeros, 0.0), ValidationError);
    CHECK_THROWS_AS(normalize_cell({}, 3.0), ValidationError);
}

TEST_CASE("normalize_cell is scale-consistent")
{
    Rng rng(62);
    for (int t = 0; t < 200; ++t) {
        const double max = 0.5 + 10 * rng.uniform01();
        std::vector<double> raw(1 + rng.uniform_index(6));
        for (auto& v : raw)
            v = max * rng.uniform01();
        const double k = 0.1 + 5 * rng.uniform01();
        std::vector<double> scaled;
        for (double v : raw)
            scaled.push_back(std::min(k * v, k * max));
        CHECK(normalize_cell(scaled, k * max) == doctest::Approx(normalize_cell(raw, max)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate_average examples")
{
    const std::vector<CellScore> no_aug{{1.09375, 3}, {1.71875, 6}, {0.4375, 3}, {0.4375, 6}};
    CHECK(std::abs(aggregate_average(no_aug) - 0.20) <= 0.01);
    CHECK(aggregate_average(no_aug) == doctest::Approx(3.6875 / 18.0));
    const std::vector<CellScore> ours{{1.6875, 3}, {3.5625, 6}, {2.375, 3}, {3.5, 6}};
    CHECK(aggregate_average(ours) == doctest::Approx(11.125 / 18.0));
    CHECK(std::abs(aggregate_average(ours) - 0.62) <= 0.01);
    const std::vector<CellScore> one{{1.25, 3}};
    const std::vector<double> raw{1.25};
    CHECK(aggregate_average(one) == normalize_cell(raw, 3));
    CHECK_THROWS_AS(aggregate_average({}), ValidationError);
}

TEST_CASE("success_rate")
{
    const std::vector<double> a{3, 3, 0, 1}, z{0, 0, 0}, twos{2, 2, 2, 2};
    CHECK(success_rate(a) == 0.5);
    CHECK(success_rate(z) == 0.0);
    CHECK(success_rate(twos) == 1.0);
    CHECK(success_rate(twos, 2.5) == 0.0);
}

TEST_CASE("rubric")
{
    const auto r = ScoreRubric::two_stage();
    CHECK(r.stages.size() == 2);
    CHECK(r.finish_max() == 6.0);
}

TEST_CASE("raw score CSV parsing")
{
    std::istringstream csv("scene,max,method,stage,task,raw_mean\n"
                           "\"Desk, left\",3,A,grasp,Fold,1.5\n"
                           "Desk right,3,A,grasp,Fold,0.5\n"
                           "\n"
                           "Desk,6,A,finish,Fold,3\n"
                           "Desk,3,\"B \"\"v2\"\"\",grasp,Fold,3\n");
    const auto table = RawScoreTable::read_csv(csv);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].scene == "Desk, left");
    CHECK(table.rows[3].method == "B \"v2\"");

    const auto rep = score_table(table);
    CHECK(rep.columns.size() == 2);
    CHECK(rep.cell("A", "Fold", "grasp") == doctest::Approx(1.0 / 3.0));
    CHECK(rep.cell("A", "Fold", "finish") == 0.5);
    CHECK_FALSE(rep.cell("B \"v2\"", "Fold", "finish").has_value());
    CHECK(rep.find("A")->average == doctest::Approx((1.0 + 3.0) / 9.0));
    CHECK(rep.find("B \"v2\"")->average == 1.0);
    CHECK(to_json(rep)["methods"].size() == 2);
    CHECK(to_text(rep).find("Fold (grasp)") != std::string::npos);
}

TEST_CASE("raw score CSV errors")
{
    std::istringstream missing("method,task,stage,scene,raw_mean\nA,T,g,s,1\n");
    CHECK_THROWS_AS(RawScoreTable::read_csv(missing), SchemaError);
    std::istringstream range("method,task,stage,scene,raw_mean,max\nA,T,g,s,4,3\n");
    CHECK_THROWS_AS(RawScoreTable::read_csv(range), ValidationError);
    std::istringstream nan("method,task,stage,scene,raw_mean,max\nA,T,g,s,abc,3\n");
    CHECK_THROWS_AS(RawScoreTable::read_csv(nan), SchemaError);
    std::istringstream ragged("method,task,stage,scene,raw_mean,max\nA,T,g,s,1\n");
    CHECK_THROWS_AS(RawScoreTable::read_csv(ragged), SchemaError);
    std::istringstream empty("method,task,stage,scene,raw_mean,max\n");
    CHECK_THROWS_AS(RawScoreTable::read_csv(empty), SchemaError);
    std::istringstream mixed("method,task,stage,scene,raw_mean,max\nA,T,g,s1,1,3\nA,T,g,s2,1,6\n");
    CHECK_THROWS_AS(score_table(RawScoreTable::read_csv(mixed)), ValidationError);
    CHECK_THROWS_AS(RawScoreTable::read_csv(std::filesystem::path("/nonexistent/raw.csv")), IoError);
}

TEST_CASE("bundled raw table reproduces the published averages")
{
    const auto rep = score_table(RawScoreTable::read_csv(std::filesystem::path(ROBOAUG_DATA_DIR) /
                                                         "raw_behavior_scores.csv"));
    CHECK(rep.methods.size() == 6);
    CHECK(rep.columns.size() == 4);
    CHECK(std::abs(rep.find("No aug")->average - 0.20) <= 0.01);
    CHECK(std::abs(rep.find("Engine")->average - 0.62) <= 0.01);
}
