#include "pixel_math.hpp"

#include "roboaug/kernels.hpp"

#include <cmath>

namespace roboaug {

namespace {

double lattice(std::uint64_t seed, int octave, int ix, int iy) noexcept
{
    const std::uint64_t h = hash_combine(hash_combine(seed, static_cast<std::uint64_t>(octave)),
                                         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
                                             static_cast<std::uint32_t>(iy));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) noexcept { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, int octave, double x, double y) noexcept
{
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int ix = static_cast<int>(fx);
    const int iy = static_cast<int>(fy);
    const double tx = smooth(x - fx);
    const double ty = smooth(y - fy);
    return detail::bilerp(lattice(seed, octave, ix, iy), lattice(seed, octave, ix + 1, iy),
                          lattice(seed, octave, ix, iy + 1), lattice(seed, octave, ix + 1, iy + 1), tx, ty);
}

double lerp(double a, double b, double t) noexcept { return a + (b - a) * t; }

} // namespace

Rgb noise_scene_pixel(const NoiseScene& scene, int x, int y, Dims dims)
{
    double sum = 0.0;
    double norm = 0.0;
    double amp = 1.0;
    double cell = scene.base_cell;
    for (int o = 0; o < scene.octaves; ++o) {
        sum += amp * value_noise(scene.seed, o, x / cell, y / cell);
        norm += amp;
        amp *= 0.5;
        cell = std::max(1.0, cell * 0.5);
    }
    const double t = norm > 0.0 ? sum / norm : 0.0;

    const bool upper = y < scene.horizon;
    const Rgb a = upper ? scene.upper_a : scene.lower_a;
    const Rgb b = upper ? scene.upper_b : scene.lower_b;
    double shade = 1.0;
    if (upper) {
        shade = 0.85 + 0.15 * (scene.horizon > 0 ? static_cast<double>(y) / scene.horizon : 1.0);
    } else {
        const int span = std::max(1, dims.height - scene.horizon);
        shade = 0.8 + 0.2 * static_cast<double>(y - scene.horizon) / span;
    }
    // Darken the rows right at the table edge.
    if (std::abs(y - scene.horizon) <= 1)
        shade *= 0.7;

    return {detail::to_byte(lerp(a.r, b.r, t) * shade), detail::to_byte(lerp(a.g, b.g, t) * shade),
            detail::to_byte(lerp(a.b, b.b, t) * shade)};
}

} // namespace roboaug
