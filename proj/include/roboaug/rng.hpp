#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace roboaug {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, 64 bit.
constexpr std::uint64_t hash_text(std::string_view text) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of the random stream owned by one frame. Depends only on the run seed,
/// the episode id and the frame index, so results do not depend on batching or
/// on the order in which workers visit frames.
constexpr std::uint64_t frame_stream_seed(std::uint64_t seed, std::string_view episode_id,
                                          std::uint64_t frame_index) noexcept
{
    return hash_combine(hash_combine(seed, hash_text(episode_id)), frame_index);
}

/// mt19937_64 with portable helpers; std distributions are implementation
/// defined, so they are not used anywhere results must be reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n) by rejection sampling. n must be > 0.
    std::size_t uniform_index(std::size_t n)
    {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = 0;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % bound);
    }

    /// Uniform in [0, 1) with 53 bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace roboaug
