#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace roboaug {

struct Dims {
    int width = 0;
    int height = 0;

    std::size_t area() const noexcept { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    bool operator==(const Dims&) const = default;
};

std::string to_string(Dims d);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Interleaved RGB 8-bit raster, row-major.
class Frame {
public:
    Frame() = default;
    Frame(Dims dims, Rgb fill = {});
    Frame(Dims dims, std::vector<std::uint8_t> rgb);

    Dims dims() const noexcept { return dims_; }
    int width() const noexcept { return dims_.width; }
    int height() const noexcept { return dims_.height; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
    std::span<std::uint8_t> bytes() noexcept { return pixels_; }

    Rgb at(int x, int y) const noexcept
    {
        const auto* p = &pixels_[3 * (static_cast<std::size_t>(y) * dims_.width + x)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) noexcept
    {
        auto* p = &pixels_[3 * (static_cast<std::size_t>(y) * dims_.width + x)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    bool operator==(const Frame&) const = default;

private:
    Dims dims_{};
    std::vector<std::uint8_t> pixels_;
};

/// Single-channel 8-bit raster (mask files on disk).
struct GrayImage {
    Dims dims{};
    std::vector<std::uint8_t> values;

    bool operator==(const GrayImage&) const = default;
};

} // namespace roboaug
