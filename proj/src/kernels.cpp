#include "roboaug/kernels.hpp"

#include "pixel_math.hpp"

#include <algorithm>
#include <climits>
#include <vector>

namespace roboaug::kernels {

namespace {

using Index = std::ptrdiff_t;

Index ssize(std::span<const std::uint8_t> s) { return static_cast<Index>(s.size()); }

// Windowed row sums over [x - r, x + r] clipped to the row, via prefix sums.
void row_window_sums(std::span<const std::uint8_t> in, Dims dims, int radius, std::vector<int>& out)
{
    const int w = dims.width;
    out.assign(dims.area(), 0);
#pragma omp parallel
    {
        std::vector<int> prefix(static_cast<std::size_t>(w) + 1);
#pragma omp for schedule(static)
        for (int y = 0; y < dims.height; ++y) {
            const std::uint8_t* row = in.data() + static_cast<std::size_t>(y) * w;
            prefix[0] = 0;
            for (int x = 0; x < w; ++x)
                prefix[x + 1] = prefix[x] + row[x];
            int* dst = out.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                const int lo = std::max(0, x - radius);
                const int hi = std::min(w, x + radius + 1);
                dst[x] = prefix[hi] - prefix[lo];
            }
        }
    }
}

// Windowed column sums of `rows` over [y - r, y + r] clipped to the column.
void column_window_sums(const std::vector<int>& rows, Dims dims, int radius, std::vector<int>& out)
{
    const int w = dims.width;
    const int h = dims.height;
    out.assign(dims.area(), 0);
#pragma omp parallel
    {
        std::vector<int> prefix(static_cast<std::size_t>(h) + 1);
#pragma omp for schedule(static)
        for (int x = 0; x < w; ++x) {
            prefix[0] = 0;
            for (int y = 0; y < h; ++y)
                prefix[y + 1] = prefix[y] + rows[static_cast<std::size_t>(y) * w + x];
            for (int y = 0; y < h; ++y) {
                const int lo = std::max(0, y - radius);
                const int hi = std::min(h, y + radius + 1);
                out[static_cast<std::size_t>(y) * w + x] = prefix[hi] - prefix[lo];
            }
        }
    }
}

} // namespace

std::size_t popcount(std::span<const std::uint8_t> bits)
{
    std::size_t n = 0;
    const Index len = ssize(bits);
#pragma omp parallel for reduction(+ : n) schedule(static)
    for (Index i = 0; i < len; ++i)
        n += bits[i] != 0;
    return n;
}

void or_into(std::span<std::uint8_t> acc, std::span<const std::uint8_t> src)
{
    const Index len = static_cast<Index>(acc.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < len; ++i)
        acc[i] = static_cast<std::uint8_t>((acc[i] | src[i]) != 0);
}

PairCounts pair_counts(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    std::size_t inter = 0;
    std::size_t uni = 0;
    const Index len = ssize(a);
#pragma omp parallel for reduction(+ : inter, uni) schedule(static)
    for (Index i = 0; i < len; ++i) {
        const bool pa = a[i] != 0;
        const bool pb = b[i] != 0;
        inter += pa && pb;
        uni += pa || pb;
    }
    return {inter, uni};
}

std::optional<Rect> support_box(std::span<const std::uint8_t> bits, Dims dims)
{
    int x0 = INT_MAX, y0 = INT_MAX, x1 = -1, y1 = -1;
#pragma omp parallel for reduction(min : x0, y0) reduction(max : x1, y1) schedule(static)
    for (int y = 0; y < dims.height; ++y) {
        const std::uint8_t* row = bits.data() + static_cast<std::size_t>(y) * dims.width;
        for (int x = 0; x < dims.width; ++x) {
            if (row[x]) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    if (x1 < 0)
        return std::nullopt;
    return Rect{x0, y0, x1 + 1, y1 + 1};
}

void dilate(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<std::uint8_t> out)
{
    if (radius <= 0) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    std::vector<int> rows, cols;
    row_window_sums(in, dims, radius, rows);
    column_window_sums(rows, dims, radius, cols);
    const Index len = static_cast<Index>(dims.area());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < len; ++i)
        out[i] = cols[i] > 0 ? 1 : 0;
}

void box_mean(std::span<const std::uint8_t> in, Dims dims, int radius, std::span<double> out)
{
    std::vector<int> rows, cols;
    row_window_sums(in, dims, radius, rows);
    column_window_sums(rows, dims, radius, cols);
    const int w = dims.width;
    const int h = dims.height;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const int wy = std::min(h, y + radius + 1) - std::max(0, y - radius);
        for (int x = 0; x < w; ++x) {
            const int wx = std::min(w, x + radius + 1) - std::max(0, x - radius);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            out[i] = static_cast<double>(cols[i]) / static_cast<double>(wx * wy);
        }
    }
}

void select(std::span<const std::uint8_t> fg, std::span<const std::uint8_t> mask, std::span<const std::uint8_t> bg,
            std::span<std::uint8_t> out)
{
    const Index n = static_cast<Index>(mask.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        const std::uint8_t* src = mask[i] ? &fg[3 * i] : &bg[3 * i];
        out[3 * i] = src[0];
        out[3 * i + 1] = src[1];
        out[3 * i + 2] = src[2];
    }
}

void blend(std::span<const std::uint8_t> fg, std::span<const double> alpha, std::span<const std::uint8_t> bg,
           std::span<std::uint8_t> out)
{
    const Index n = static_cast<Index>(alpha.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        const double a = alpha[i];
        for (int c = 0; c < 3; ++c)
            out[3 * i + c] = detail::blend_channel(fg[3 * i + c], a, bg[3 * i + c]);
    }
}

void chroma_key(std::span<const std::uint8_t> rgb, Rgb key, int tolerance, std::span<std::uint8_t> foreground)
{
    const Index n = static_cast<Index>(foreground.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i)
        foreground[i] = detail::keyed(&rgb[3 * i], key, tolerance) ? 0 : 1;
}

void resample(std::span<const std::uint8_t> src, Dims src_dims, std::span<std::uint8_t> dst, Dims dst_dims,
              CoverMap map, Resample mode)
{
    const int sw = src_dims.width;
    const int dw = dst_dims.width;
    if (mode == Resample::nearest) {
        std::vector<int> xs(static_cast<std::size_t>(dw));
        for (int x = 0; x < dw; ++x)
            xs[x] = detail::nearest_index(x, map.offset_x, map.scale, sw);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < dst_dims.height; ++y) {
            const int sy = detail::nearest_index(y, map.offset_y, map.scale, src_dims.height);
            const std::uint8_t* srow = src.data() + 3 * static_cast<std::size_t>(sy) * sw;
            std::uint8_t* drow = dst.data() + 3 * static_cast<std::size_t>(y) * dw;
            for (int x = 0; x < dw; ++x) {
                const std::uint8_t* p = srow + 3 * xs[x];
                drow[3 * x] = p[0];
                drow[3 * x + 1] = p[1];
                drow[3 * x + 2] = p[2];
            }
        }
        return;
    }

    std::vector<detail::LinearTap> xs(static_cast<std::size_t>(dw));
    for (int x = 0; x < dw; ++x)
        xs[x] = detail::linear_tap(x, map.offset_x, map.scale, sw);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst_dims.height; ++y) {
        const auto ty = detail::linear_tap(y, map.offset_y, map.scale, src_dims.height);
        const std::uint8_t* r0 = src.data() + 3 * static_cast<std::size_t>(ty.i0) * sw;
        const std::uint8_t* r1 = src.data() + 3 * static_cast<std::size_t>(ty.i1) * sw;
        std::uint8_t* drow = dst.data() + 3 * static_cast<std::size_t>(y) * dw;
        for (int x = 0; x < dw; ++x) {
            const auto& tx = xs[x];
            for (int c = 0; c < 3; ++c)
                drow[3 * x + c] = detail::to_byte(detail::bilerp(r0[3 * tx.i0 + c], r0[3 * tx.i1 + c],
                                                                 r1[3 * tx.i0 + c], r1[3 * tx.i1 + c], tx.w, ty.w));
        }
    }
}

void render_scene(const NoiseScene& scene, Dims dims, std::span<std::uint8_t> out)
{
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dims.height; ++y) {
        for (int x = 0; x < dims.width; ++x) {
            const Rgb c = noise_scene_pixel(scene, x, y, dims);
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * dims.width + x);
            out[i] = c.r;
            out[i + 1] = c.g;
            out[i + 2] = c.b;
        }
    }
}

} // namespace roboaug::kernels
