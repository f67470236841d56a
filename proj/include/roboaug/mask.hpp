#pragma once

#include "roboaug/image.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace roboaug {

/// Axis-aligned pixel rectangle, inclusive-exclusive.
struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    std::size_t area() const noexcept
    {
        return static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0);
    }
    bool operator==(const Rect&) const = default;
};

/// Per-pixel foreground set stored one byte per pixel (0 or 1), row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    explicit BinaryMask(Dims dims, bool fill = false);
    BinaryMask(Dims dims, std::vector<std::uint8_t> bits);

    Dims dims() const noexcept { return dims_; }
    int width() const noexcept { return dims_.width; }
    int height() const noexcept { return dims_.height; }

    bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * dims_.width + x] != 0; }
    void set(int x, int y, bool v = true) noexcept { bits_[static_cast<std::size_t>(y) * dims_.width + x] = v ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::span<std::uint8_t> bits() noexcept { return bits_; }

    std::size_t popcount() const noexcept;
    bool none() const noexcept { return popcount() == 0; }

    bool operator==(const BinaryMask&) const = default;

private:
    Dims dims_{};
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel alpha in [0, 1].
class SoftMask {
public:
    SoftMask() = default;
    SoftMask(Dims dims, std::vector<double> alpha);

    Dims dims() const noexcept { return dims_; }
    double at(int x, int y) const noexcept { return alpha_[static_cast<std::size_t>(y) * dims_.width + x]; }
    std::span<const double> alpha() const noexcept { return alpha_; }

    bool operator==(const SoftMask&) const = default;

private:
    Dims dims_{};
    std::vector<double> alpha_;
};

/// Foreground F = union of the inputs. Throws on an empty list or mismatched dims.
BinaryMask mask_union(std::span<const BinaryMask> masks);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b);
BinaryMask complement(const BinaryMask& m);
std::size_t intersection_count(const BinaryMask& a, const BinaryMask& b);
bool is_subset(const BinaryMask& a, const BinaryMask& b);

/// Dilation by a (2r+1)x(2r+1) square; pixels outside the frame never contribute.
BinaryMask dilate(const BinaryMask& mask, int radius);
/// Erosion by the same square; only in-frame window pixels are required to be set.
BinaryMask erode(const BinaryMask& mask, int radius);

/// Box-blurred alpha with kernel side 2r+1, averaged over the in-frame part of
/// the window. radius 0 reproduces the mask as 0/1 alpha.
SoftMask feather(const BinaryMask& mask, int radius);
SoftMask to_soft(const BinaryMask& mask);

std::optional<Rect> bbox(const BinaryMask& mask);

/// value >= 128 is foreground.
BinaryMask decode_mask(const GrayImage& raster);
/// 1 -> 255, 0 -> 0.
GrayImage encode_mask(const BinaryMask& mask);

} // namespace roboaug
