#include "roboaug/kernels.hpp"

#include "pixel_math.hpp"

#include <algorithm>

namespace roboaug::reference {

std::size_t popcount(std::span<const std::uint8_t> bits)
{
    std::size_t n = 0;
    for (auto b : bits)
        if (b)
            ++n;
    return n;
}

void or_into(std::span<std::uint8_t> acc, std::span<const std::uint8_t> src)
{
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] = (acc[i] || src[i]) ? 1 : 0;
}

PairCounts pair_counts(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    PairCounts c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i])
            ++c.intersection;
        if (a[i] || b[i])
            ++c.union_;
    }
    return c;
}

std::optional<Rect> support_box(std::span<const std::uint8_t> bits, Dims dims)
{
    std::optional<Rect> box;
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            if (!bits[static_cast<std::size_t>(y) * dims.width + x])
                continue;
            if (!box) {
                box = Rect{x, y, x + 1, y + 1};
            } else {
                box->x0 = std::min(box->x0, x);
                box->y0 = std::min(box->y0, y);
                box->x1 = std::max(box->x1, x + 1);
                box->y1 = std::max(box->y1, y + 1);
            }
        }
    }
    return box;
}

void dilate(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<std::uint8_t> out)
{
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            bool hit = false;
            for (int dy = -radius; dy <= radius && !hit; ++dy) {
                for (int dx = -radius; dx <= radius && !hit; ++dx) {
                    const int sx = x + dx;
                    const int sy = y + dy;
                    if (sx >= 0 && sy >= 0 && sx < dims.width && sy < dims.height &&
                        in[static_cast<std::size_t>(sy) * dims.width + sx])
                        hit = true;
                }
            }
            out[static_cast<std::size_t>(y) * dims.width + x] = hit ? 1 : 0;
        }
    }
}

void box_mean(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<double> out)
{
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            int sum = 0;
            int count = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sx = x + dx;
                    const int sy = y + dy;
                    if (sx < 0 || sy < 0 || sx >= dims.width || sy >= dims.height)
                        continue;
                    ++count;
                    sum += in[static_cast<std::size_t>(sy) * dims.width + sx] ? 1 : 0;
                }
            }
            out[static_cast<std::size_t>(y) * dims.width + x] = static_cast<double>(sum) / count;
        }
    }
}

void select(std::span<const std::uint8_t> fg, std::span<const std::uint8_t> mask, std::span<const std::uint8_t> bg,
            std::span<std::uint8_t> out)
{
    for (std::size_t i = 0; i < mask.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c)
            out[3 * i + c] = mask[i] ? fg[3 * i + c] : bg[3 * i + c];
}

void blend(std::span<const std::uint8_t> fg, std::span<const double> alpha, std::span<const std::uint8_t> bg,
           std::span<std::uint8_t> out)
{
    for (std::size_t i = 0; i < alpha.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c)
            out[3 * i + c] = detail::blend_channel(fg[3 * i + c], alpha[i], bg[3 * i + c]);
}

void chroma_key(std::span<const std::uint8_t> rgb, Rgb key, int tolerance, std::span<std::uint8_t> foreground)
{
    for (std::size_t i = 0; i < foreground.size(); ++i)
        foreground[i] = detail::keyed(&rgb[3 * i], key, tolerance) ? 0 : 1;
}

void resample(std::span<const std::uint8_t> src, Dims src_dims, std::span<std::uint8_t> dst, Dims dst_dims,
              CoverMap map, Resample mode)
{
    auto src_at = [&](int x, int y, int c) -> std::uint8_t {
        return src[3 * (static_cast<std::size_t>(y) * src_dims.width + x) + c];
    };
    for (int y = 0; y < dst_dims.height; ++y) {
        for (int x = 0; x < dst_dims.width; ++x) {
            std::uint8_t* d = &dst[3 * (static_cast<std::size_t>(y) * dst_dims.width + x)];
            if (mode == Resample::nearest) {
                const int sx = detail::nearest_index(x, map.offset_x, map.scale, src_dims.width);
                const int sy = detail::nearest_index(y, map.offset_y, map.scale, src_dims.height);
                for (int c = 0; c < 3; ++c)
                    d[c] = src_at(sx, sy, c);
            } else {
                const auto tx = detail::linear_tap(x, map.offset_x, map.scale, src_dims.width);
                const auto ty = detail::linear_tap(y, map.offset_y, map.scale, src_dims.height);
                for (int c = 0; c < 3; ++c)
                    d[c] = detail::to_byte(detail::bilerp(src_at(tx.i0, ty.i0, c), src_at(tx.i1, ty.i0, c),
                                                          src_at(tx.i0, ty.i1, c), src_at(tx.i1, ty.i1, c), tx.w,
                                                          ty.w));
            }
        }
    }
}

void render_scene(const NoiseScene& scene, Dims dims, std::span<std::uint8_t> out)
{
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            const Rgb c = noise_scene_pixel(scene, x, y, dims);
            std::uint8_t* d = &out[3 * (static_cast<std::size_t>(y) * dims.width + x)];
            d[0] = c.r;
            d[1] = c.g;
            d[2] = c.b;
        }
    }
}

} // namespace roboaug::reference
