#include "roboaug/dataset.hpp"
#include "roboaug/errors.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace roboaug;
using namespace roboaug::test;

TEST_CASE("load a 1-episode, 3-frame dataset")
{
    TempDir tmp("ds");
    const auto fx = make_fixture_episode("ep0", 3, {8, 6}, 1);
    DemoDataset ds{{fx.episode}, {}};
    CHECK(save_dataset(ds, tmp / "root") == tmp / "root");
    CHECK(fs::is_regular_file(tmp / "root/episodes/ep0/frames/000000.png"));
    CHECK(fs::is_regular_file(tmp / "root/episodes/ep0/frames/000002.png"));
    CHECK(fs::is_regular_file(tmp / "root/episodes/ep0/meta.json"));

    const auto loaded = load_dataset(tmp / "root");
    REQUIRE(loaded.episodes.size() == 1);
    CHECK(loaded.episodes[0].frames.size() == 3);
    CHECK(loaded.episodes[0] == fx.episode);
    CHECK(structurally_equal(loaded, ds));
}

TEST_CASE("empty directory has no episodes")
{
    TempDir tmp("empty");
    try {
        load_dataset(tmp.path());
        FAIL("expected an error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("no episodes found") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
    fs::create_directories(tmp / "episodes");
    CHECK_THROWS_AS(load_dataset(tmp.path()), SchemaError);
}

TEST_CASE("round trip keeps extra byte-identical")
{
    TempDir tmp("rt");
    auto a = make_fixture_episode("alpha", 2, {5, 4}, 2);
    auto b = make_fixture_episode("beta", 1, {3, 7}, 3);
    b.episode.metadata.extra = nlohmann::ordered_json::parse(R"({"actions": [0.30000000000000004, 1e300, -0.0]})");
    b.episode.metadata.object_names.clear();
    DemoDataset ds{{a.episode, b.episode}, {}};
    save_dataset(ds, tmp / "one");
    const auto once = load_dataset(tmp / "one");
    save_dataset(once, tmp / "two");
    CHECK(structurally_equal(once, load_dataset(tmp / "two")));
    CHECK(tree_hash(tmp / "one") == tree_hash(tmp / "two"));

    // key order of extra survives
    const auto text = read_file(tmp / "one/episodes/alpha/meta.json");
    const std::string s(text.begin(), text.end());
    CHECK(s.find("\"z_key\"") < s.find("\"a_key\""));
}

TEST_CASE("hand-written meta.json keeps key order and canonical text is a fixed point")
{
    TempDir tmp("meta");
    const auto fx = make_fixture_episode("e", 1, {2, 2}, 4);
    save_dataset({{fx.episode}, {}}, tmp / "root");
    write_file(tmp / "root/episodes/e/meta.json",
               std::string_view(R"({"instruction": "fold the towel", "object_names": ["towel"],
                                    "extra": {"q": [1.5, 2.25], "b": null}})"));
    const auto ds = load_dataset(tmp / "root");
    const auto& meta = ds.episodes[0].metadata;
    CHECK(meta.instruction == "fold the towel");
    CHECK(meta.object_names == std::vector<std::string>{"towel"});
    CHECK(meta.extra.begin().key() == "q");
    const auto canonical = metadata_to_json(meta);
    CHECK(metadata_to_json(parse_metadata(canonical, "e")) == canonical);
}

TEST_CASE("save errors")
{
    TempDir tmp("save");
    const auto fx = make_fixture_episode("dup", 1, {2, 2}, 5);
    CHECK_THROWS_AS(save_dataset({{fx.episode, fx.episode}, {}}, tmp / "a"), SchemaError);

    save_dataset({{fx.episode}, {}}, tmp / "b");
    CHECK_THROWS_AS(save_dataset({{fx.episode}, {}}, tmp / "b"), IoError);
    CHECK_NOTHROW(save_dataset({{fx.episode}, {}}, tmp / "b", {.overwrite = true}));

    write_file(tmp / "file", std::string_view("x"));
    try {
        save_dataset({{fx.episode}, {}}, tmp / "file" / "sub", {.overwrite = true});
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(e.exit_code() == 4);
    }

    Episode bad = fx.episode;
    bad.id = "../escape";
    CHECK_THROWS_AS(save_dataset({{bad}, {}}, tmp / "c"), SchemaError);
}

TEST_CASE("load errors name the episode")
{
    TempDir tmp("bad");
    auto fx = make_fixture_episode("e1", 2, {4, 4}, 6);
    save_dataset({{fx.episode}, {}}, tmp / "root");

    SUBCASE("missing meta")
    {
        fs::remove(tmp / "root/episodes/e1/meta.json");
        try {
            load_dataset(tmp / "root");
            FAIL("expected an error");
        } catch (const SchemaError& e) {
            CHECK(std::string(e.what()).find("e1") != std::string::npos);
        }
    }
    SUBCASE("dimension mismatch")
    {
        write_png(Frame({5, 4}), tmp / "root/episodes/e1/frames/000001.png");
        CHECK_THROWS_AS(load_dataset(tmp / "root"), ValidationError);
    }
    SUBCASE("gap in frame numbering")
    {
        fs::rename(tmp / "root/episodes/e1/frames/000001.png", tmp / "root/episodes/e1/frames/000005.png");
        CHECK_THROWS_AS(load_dataset(tmp / "root"), SchemaError);
    }
    SUBCASE("empty instruction")
    {
        write_file(tmp / "root/episodes/e1/meta.json", std::string_view(R"({"instruction": "", "object_names": []})"));
        CHECK_THROWS_AS(load_dataset(tmp / "root"), SchemaError);
    }
    SUBCASE("malformed json")
    {
        write_file(tmp / "root/episodes/e1/meta.json", std::string_view("{"));
        CHECK_THROWS_AS(load_dataset(tmp / "root"), SchemaError);
    }
}

TEST_CASE("reader is lazy")
{
    TempDir tmp("lazy");
    auto fx = make_fixture_episode("e", 2, {4, 3}, 7);
    save_dataset({{fx.episode}, {}}, tmp / "root");
    // a corrupted body with an intact header is only noticed on decode
    auto bytes = read_file(tmp / "root/episodes/e/frames/000001.png");
    bytes.resize(40);
    write_file(tmp / "root/episodes/e/frames/000001.png", bytes);
    const DatasetReader reader(tmp / "root");
    CHECK(reader.size() == 1);
    CHECK(reader.entry(0).dims == Dims{4, 3});
    CHECK_THROWS_AS(reader.episode(0), ValidationError);
}

TEST_CASE("round trip property over random fixtures")
{
    Rng rng(8);
    for (int t = 0; t < 8; ++t) {
        TempDir tmp("prop");
        DemoDataset ds;
        const int n = 1 + static_cast<int>(rng.uniform_index(3));
        for (int e = 0; e < n; ++e) {
            const Dims d{1 + static_cast<int>(rng.uniform_index(9)), 1 + static_cast<int>(rng.uniform_index(9))};
            ds.episodes.push_back(
                make_fixture_episode("ep" + std::to_string(e), 1 + static_cast<int>(rng.uniform_index(3)), d, rng.next())
                    .episode);
        }
        save_dataset(ds, tmp / "a");
        const auto back = load_dataset(tmp / "a");
        CHECK(structurally_equal(back, ds));
        for (std::size_t e = 0; e < ds.episodes.size(); ++e)
            for (std::size_t i = 0; i < ds.episodes[e].frames.size(); ++i)
                CHECK(back.episodes[e].frames[i].bytes().size() == ds.episodes[e].frames[i].bytes().size());
    }
}

TEST_CASE("object name extraction")
{
    CHECK(extract_object_names("put the mouse to the pad") == std::vector<std::string>{"mouse", "pad"});
    CHECK(extract_object_names("Fold the Towel") == std::vector<std::string>{"towel"});
    CHECK(extract_object_names("wave").empty());
}

TEST_CASE("annotated set round trip and loading rules")
{
    TempDir tmp("seg");
    const auto recs = make_annotated(2, {6, 5}, 9);
    save_roboseg(recs, tmp / "set");
    CHECK(fs::is_regular_file(tmp / "set/images/img_0.png"));
    CHECK(fs::is_regular_file(tmp / "set/masks/robot_main/img_0.png"));
    CHECK(fs::is_regular_file(tmp / "set/annotations.json"));

    const auto back = load_roboseg(tmp / "set");
    REQUIRE(back.size() == 2);
    CHECK(back == recs);
    for (const auto& r : back)
        CHECK(r.robot_main.dims() == r.image.dims());

    SUBCASE("absent robot_aux reads as empty")
    {
        fs::remove(tmp / "set/masks/robot_aux/img_0.png");
        const auto r = load_roboseg(tmp / "set");
        CHECK(r[0].robot_aux.none());
        CHECK(r[0].robot_aux.dims() == r[0].image.dims());
    }
    SUBCASE("absent robot_main lists the image")
    {
        fs::remove(tmp / "set/masks/robot_main/img_1.png");
        fs::remove(tmp / "set/masks/object/img_0.png");
        try {
            load_roboseg(tmp / "set");
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("img_1") != std::string::npos);
            CHECK(msg.find("img_0") != std::string::npos);
        }
    }
    SUBCASE("mask dims differ from the image")
    {
        write_png(encode_mask(BinaryMask({3, 3})), tmp / "set/masks/object/img_1.png");
        CHECK_THROWS_AS(load_roboseg(tmp / "set"), ValidationError);
    }
}

TEST_CASE("validate_annotation")
{
    auto rec = make_annotated(1, {10, 10}, 10).front();
    rec.object = BinaryMask(rec.image.dims());
    CHECK(validate_annotation(rec).ok());

    // robot_main is 5x5 = 25 px; overlapping 3 px is 12%, above 1%
    rec.robot_main = rect_mask({10, 10}, 0, 0, 5, 5);
    rec.object = rect_mask({10, 10}, 0, 0, 3, 1);
    auto rep = validate_annotation(rec);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == Violation::Kind::overlap);
    CHECK(validate_annotation(rec, 0.2).ok());

    rec.object = BinaryMask({10, 10});
    rec.instruction.clear();
    rep = validate_annotation(rec);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == Violation::Kind::missing_instruction);

    rec.instruction = "x";
    rec.robot_aux = BinaryMask({4, 4});
    rep = validate_annotation(rec);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == Violation::Kind::dimension_mismatch);
}
