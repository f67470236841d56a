#pragma once

#include "roboaug/kernels.hpp"
#include "roboaug/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace roboaug::detail {

/// Round half up, clamped to [0, 255].
inline std::uint8_t to_byte(double v) noexcept
{
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline std::uint8_t blend_channel(std::uint8_t fg, double alpha, std::uint8_t bg) noexcept
{
    return to_byte(alpha * fg + (1.0 - alpha) * bg);
}

inline bool keyed(const std::uint8_t* px, Rgb key, int tolerance) noexcept
{
    const int d = std::max({std::abs(px[0] - key.r), std::abs(px[1] - key.g), std::abs(px[2] - key.b)});
    return d <= tolerance;
}

inline int nearest_index(int dst, int offset, double scale, int src_len) noexcept
{
    const auto i = static_cast<int>(std::floor((dst + offset) / scale));
    return std::clamp(i, 0, src_len - 1);
}

struct LinearTap {
    int i0 = 0, i1 = 0;
    double w = 0.0;
};

inline LinearTap linear_tap(int dst, int offset, double scale, int src_len) noexcept
{
    double f = (dst + offset + 0.5) / scale - 0.5;
    f = std::clamp(f, 0.0, static_cast<double>(src_len - 1));
    const auto i0 = static_cast<int>(std::floor(f));
    return {i0, std::min(i0 + 1, src_len - 1), f - i0};
}

inline double bilerp(double p00, double p10, double p01, double p11, double wx, double wy) noexcept
{
    return (1.0 - wy) * ((1.0 - wx) * p00 + wx * p10) + wy * ((1.0 - wx) * p01 + wx * p11);
}

} // namespace roboaug::detail
