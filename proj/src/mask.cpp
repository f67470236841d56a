#include "roboaug/mask.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/kernels.hpp"

#include <algorithm>

namespace roboaug {

namespace {

void check_dims(Dims d)
{
    if (d.width < 1 || d.height < 1)
        throw ValidationError("mask dimensions must be at least 1x1, got " + to_string(d));
}

void check_same(const BinaryMask& a, const BinaryMask& b)
{
    if (a.dims() != b.dims())
        throw ValidationError("mask dimension mismatch: " + to_string(a.dims()) + " vs " + to_string(b.dims()));
}

void check_radius(int radius)
{
    if (radius < 0)
        throw ConfigError("radius must be >= 0, got " + std::to_string(radius));
}

} // namespace

BinaryMask::BinaryMask(Dims dims, bool fill) : dims_(dims), bits_(dims.area(), fill ? 1 : 0)
{
    check_dims(dims);
}

BinaryMask::BinaryMask(Dims dims, std::vector<std::uint8_t> bits) : dims_(dims), bits_(std::move(bits))
{
    check_dims(dims);
    if (bits_.size() != dims.area())
        throw ValidationError("mask buffer size does not match " + to_string(dims));
    for (auto& b : bits_)
        b = b ? 1 : 0;
}

std::size_t BinaryMask::popcount() const noexcept
{
    return kernels::popcount(bits_);
}

SoftMask::SoftMask(Dims dims, std::vector<double> alpha) : dims_(dims), alpha_(std::move(alpha))
{
    check_dims(dims);
    if (alpha_.size() != dims.area())
        throw ValidationError("alpha buffer size does not match " + to_string(dims));
    for (double a : alpha_)
        if (!(a >= 0.0 && a <= 1.0))
            throw ValidationError("alpha value outside [0,1]");
}

BinaryMask mask_union(std::span<const BinaryMask> masks)
{
    if (masks.empty())
        throw ValidationError("union of an empty mask list");
    BinaryMask out = masks.front();
    for (const auto& m : masks.subspan(1)) {
        check_same(out, m);
        kernels::or_into(out.bits(), m.bits());
    }
    return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b)
{
    check_same(a, b);
    BinaryMask out = a;
    kernels::or_into(out.bits(), b.bits());
    return out;
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b)
{
    check_same(a, b);
    BinaryMask out(a.dims());
    auto dst = out.bits();
    const auto pa = a.bits();
    const auto pb = b.bits();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = pa[i] & pb[i];
    return out;
}

BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b)
{
    check_same(a, b);
    BinaryMask out(a.dims());
    auto dst = out.bits();
    const auto pa = a.bits();
    const auto pb = b.bits();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = pa[i] & static_cast<std::uint8_t>(!pb[i]);
    return out;
}

BinaryMask complement(const BinaryMask& m)
{
    BinaryMask out(m.dims());
    auto dst = out.bits();
    const auto src = m.bits();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = src[i] ? 0 : 1;
    return out;
}

std::size_t intersection_count(const BinaryMask& a, const BinaryMask& b)
{
    check_same(a, b);
    return kernels::pair_counts(a.bits(), b.bits()).intersection;
}

bool is_subset(const BinaryMask& a, const BinaryMask& b)
{
    check_same(a, b);
    const auto pa = a.bits();
    const auto pb = b.bits();
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (pa[i] && !pb[i])
            return false;
    return true;
}

BinaryMask dilate(const BinaryMask& mask, int radius)
{
    check_radius(radius);
    BinaryMask out(mask.dims());
    kernels::dilate(mask.bits(), mask.dims(), radius, out.bits());
    return out;
}

BinaryMask erode(const BinaryMask& mask, int radius)
{
    check_radius(radius);
    BinaryMask inv = complement(mask);
    BinaryMask grown(mask.dims());
    kernels::dilate(inv.bits(), mask.dims(), radius, grown.bits());
    return complement(grown);
}

SoftMask feather(const BinaryMask& mask, int radius)
{
    check_radius(radius);
    std::vector<double> alpha(mask.dims().area());
    if (radius == 0) {
        const auto bits = mask.bits();
        for (std::size_t i = 0; i < alpha.size(); ++i)
            alpha[i] = bits[i] ? 1.0 : 0.0;
    } else {
        kernels::box_mean(mask.bits(), mask.dims(), radius, alpha);
    }
    return SoftMask(mask.dims(), std::move(alpha));
}

SoftMask to_soft(const BinaryMask& mask)
{
    return feather(mask, 0);
}

std::optional<Rect> bbox(const BinaryMask& mask)
{
    return kernels::support_box(mask.bits(), mask.dims());
}

BinaryMask decode_mask(const GrayImage& raster)
{
    if (raster.values.size() != raster.dims.area())
        throw ValidationError("mask raster size does not match " + to_string(raster.dims));
    std::vector<std::uint8_t> bits(raster.values.size());
    std::transform(raster.values.begin(), raster.values.end(), bits.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v >= 128); });
    return BinaryMask(raster.dims, std::move(bits));
}

GrayImage encode_mask(const BinaryMask& mask)
{
    GrayImage out{mask.dims(), std::vector<std::uint8_t>(mask.dims().area())};
    std::transform(mask.bits().begin(), mask.bits().end(), out.values.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    return out;
}

} // namespace roboaug
