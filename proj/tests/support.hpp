#pragma once

// Fixtures and helpers shared by the test binaries.

#include "roboaug/dataset.hpp"
#include "roboaug/image_io.hpp"
#include "roboaug/rng.hpp"
#include "roboaug/segmentation.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace roboaug::test {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t")
    {
        static std::uint64_t counter = 0;
        const auto base = fs::temp_directory_path() / "roboaug-tests";
        fs::create_directories(base);
        Rng rng(reinterpret_cast<std::uintptr_t>(this) ^ ++counter ^
                static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
        path_ = base / (tag + "-" + std::to_string(rng.next() % 1000000007ULL));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

/// SHA-256 over every regular file's relative path and contents, in sorted order.
inline std::string tree_hash(const fs::path& root)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            files.push_back(fs::relative(e.path(), root));
    std::sort(files.begin(), files.end());
    std::vector<std::uint8_t> blob;
    for (const auto& rel : files) {
        const auto name = rel.generic_string();
        blob.insert(blob.end(), name.begin(), name.end());
        blob.push_back(0);
        const auto bytes = read_file(root / rel);
        const auto n = bytes.size();
        for (int i = 0; i < 8; ++i)
            blob.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
        blob.insert(blob.end(), bytes.begin(), bytes.end());
    }
    return sha256_hex(blob);
}

inline Frame random_frame(Dims d, Rng& rng)
{
    std::vector<std::uint8_t> px(d.area() * 3);
    for (auto& v : px)
        v = static_cast<std::uint8_t>(rng.uniform_index(256));
    return Frame(d, std::move(px));
}

inline BinaryMask random_mask(Dims d, Rng& rng, double density = 0.5)
{
    BinaryMask m(d);
    for (auto& b : m.bits())
        b = rng.uniform01() < density ? 1 : 0;
    return m;
}

inline BinaryMask rect_mask(Dims d, int x0, int y0, int x1, int y1)
{
    BinaryMask m(d);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            m.set(x, y);
    return m;
}

/// A moving "robot" rectangle and a fixed "object" rectangle over a random
/// scene; the object is listed in metadata.
struct FixtureEpisode {
    Episode episode;
    std::vector<BinaryMask> robot;
    std::vector<BinaryMask> object;
};

inline FixtureEpisode make_fixture_episode(const std::string& id, int frames, Dims d, std::uint64_t seed)
{
    Rng rng(seed);
    FixtureEpisode fx;
    fx.episode.id = id;
    fx.episode.metadata.instruction = "put the mouse to the pad";
    fx.episode.metadata.object_names = {"mouse"};
    fx.episode.metadata.extra = nlohmann::ordered_json::parse(
        R"({"actions": [[0.1, -0.25, 3.0], [1e-3, 0, 7]], "z_key": "last", "a_key": {"nested": true}})");
    for (int i = 0; i < frames; ++i) {
        Frame f = random_frame(d, rng);
        // distinct content per frame keeps the ground-truth index unambiguous
        f.set(0, 0, {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i >> 8), 7});
        const int rx = (i * 3) % std::max(1, d.width / 2);
        fx.robot.push_back(rect_mask(d, rx, 0, rx + d.width / 3, d.height / 2));
        fx.object.push_back(rect_mask(d, d.width / 2, d.height / 2, d.width * 3 / 4, d.height * 3 / 4));
        fx.episode.frames.push_back(std::move(f));
    }
    return fx;
}

/// Saves the episodes plus their ground-truth masks and a few stored proposals.
inline void write_fixture_dataset(const fs::path& root, const std::vector<FixtureEpisode>& eps)
{
    DemoDataset ds;
    for (const auto& fx : eps)
        ds.episodes.push_back(fx.episode);
    save_dataset(ds, root);
    for (const auto& fx : eps) {
        const auto dir = root / "episodes" / fx.episode.id;
        const Dims d = fx.episode.frames.front().dims();
        for (std::size_t i = 0; i < fx.episode.frames.size(); ++i) {
            GroundTruthIndex::Entry entry{fx.robot[i], fx.object[i], {}};
            entry.proposals.push_back(rect_mask(d, 0, d.height * 3 / 4, d.width / 4, d.height));
            entry.proposals.push_back(rect_mask(d, d.width * 3 / 4, 0, d.width, d.height / 4));
            entry.proposals.push_back(fx.object[i]);
            write_ground_truth(dir, i, entry);
        }
    }
}

inline void write_lines(const fs::path& path, const std::vector<std::string>& lines)
{
    std::string text;
    for (const auto& l : lines)
        text += l + "\n";
    write_file(path, text);
}

/// Two small texture assets.
inline void write_asset_pool(const fs::path& dir)
{
    fs::create_directories(dir);
    Frame a({2, 2});
    a.set(0, 0, {255, 0, 0});
    a.set(1, 0, {0, 255, 0});
    a.set(0, 1, {0, 0, 255});
    a.set(1, 1, {255, 255, 255});
    write_png(a, dir / "checker.png");
    Rng rng(99);
    write_png(random_frame({24, 16}, rng), dir / "noise.png");
}

inline std::vector<AnnotatedFrame> make_annotated(int n, Dims d, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<AnnotatedFrame> out;
    for (int i = 0; i < n; ++i) {
        AnnotatedFrame rec;
        rec.name = "img_" + std::to_string(i);
        rec.image = random_frame(d, rng);
        rec.robot_main = rect_mask(d, 0, 0, d.width / 2, d.height / 2 + i % 3);
        rec.robot_aux = i % 2 == 0 ? rect_mask(d, 0, d.height - 2, d.width, d.height) : BinaryMask(d);
        rec.object = rect_mask(d, d.width * 3 / 4, d.height / 2, d.width, d.height * 3 / 4);
        rec.instruction = "pick up the cup";
        rec.descriptions = {"a kitchen counter", "an office desk"};
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace roboaug::test
