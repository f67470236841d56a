#pragma once

// Pixel kernels. `kernels` holds the OpenMP implementations used by the
// library; `reference` holds straightforward serial versions with the same
// signatures. Tests assert both agree bit-for-bit and the benchmark target
// compares their throughput.

#include "roboaug/image.hpp"
#include "roboaug/mask.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace roboaug {

struct PairCounts {
    std::size_t intersection = 0;
    std::size_t union_ = 0;
    bool operator==(const PairCounts&) const = default;
};

/// Maps destination pixels into a source image scaled by `scale` and cropped
/// at (offset_x, offset_y) in scaled coordinates.
struct CoverMap {
    double scale = 1.0;
    int offset_x = 0;
    int offset_y = 0;
};

enum class Resample { nearest, bilinear };

/// Parameters of the procedural scene: two value-noise layers split at a
/// horizon row (wall above, table/floor below) with a vertical gradient.
struct NoiseScene {
    std::uint64_t seed = 0;
    int horizon = 0;
    Rgb upper_a, upper_b;
    Rgb lower_a, lower_b;
    int octaves = 4;
    double base_cell = 32.0;
};

Rgb noise_scene_pixel(const NoiseScene& scene, int x, int y, Dims dims);

namespace kernels {

std::size_t popcount(std::span<const std::uint8_t> bits);
void or_into(std::span<std::uint8_t> acc, std::span<const std::uint8_t> src);
PairCounts pair_counts(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::optional<Rect> support_box(std::span<const std::uint8_t> bits, Dims dims);

void dilate(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<std::uint8_t> out);
void box_mean(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<double> out);

void select(std::span<const std::uint8_t> fg, std::span<const std::uint8_t> mask, std::span<const std::uint8_t> bg,
            std::span<std::uint8_t> out);
void blend(std::span<const std::uint8_t> fg, std::span<const double> alpha, std::span<const std::uint8_t> bg,
           std::span<std::uint8_t> out);

void chroma_key(std::span<const std::uint8_t> rgb, Rgb key, int tolerance, std::span<std::uint8_t> foreground);

void resample(std::span<const std::uint8_t> src, Dims src_dims, std::span<std::uint8_t> dst, Dims dst_dims,
              CoverMap map, Resample mode);

void render_scene(const NoiseScene& scene, Dims dims, std::span<std::uint8_t> out);

} // namespace kernels

namespace reference {

std::size_t popcount(std::span<const std::uint8_t> bits);
void or_into(std::span<std::uint8_t> acc, std::span<const std::uint8_t> src);
PairCounts pair_counts(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::optional<Rect> support_box(std::span<const std::uint8_t> bits, Dims dims);

void dilate(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<std::uint8_t> out);
void box_mean(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<double> out);

void select(std::span<const std::uint8_t> fg, std::span<const std::uint8_t> mask, std::span<const std::uint8_t> bg,
            std::span<std::uint8_t> out);
void blend(std::span<const std::uint8_t> fg, std::span<const double> alpha, std::span<const std::uint8_t> bg,
           std::span<std::uint8_t> out);

void chroma_key(std::span<const std::uint8_t> rgb, Rgb key, int tolerance, std::span<std::uint8_t> foreground);

void resample(std::span<const std::uint8_t> src, Dims src_dims, std::span<std::uint8_t> dst, Dims dst_dims,
              CoverMap map, Resample mode);

void render_scene(const NoiseScene& scene, Dims dims, std::span<std::uint8_t> out);

} // namespace reference

} // namespace roboaug
