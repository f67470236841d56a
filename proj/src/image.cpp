#include "roboaug/image.hpp"

#include "roboaug/errors.hpp"

namespace roboaug {

std::string to_string(Dims d)
{
    return std::to_string(d.width) + "x" + std::to_string(d.height);
}

Frame::Frame(Dims dims, Rgb fill) : dims_(dims)
{
    if (dims.width < 1 || dims.height < 1)
        throw ValidationError("frame dimensions must be at least 1x1, got " + to_string(dims));
    pixels_.resize(3 * dims.area());
    for (std::size_t i = 0; i < dims.area(); ++i) {
        pixels_[3 * i] = fill.r;
        pixels_[3 * i + 1] = fill.g;
        pixels_[3 * i + 2] = fill.b;
    }
}

Frame::Frame(Dims dims, std::vector<std::uint8_t> rgb) : dims_(dims), pixels_(std::move(rgb))
{
    if (dims.width < 1 || dims.height < 1)
        throw ValidationError("frame dimensions must be at least 1x1, got " + to_string(dims));
    if (pixels_.size() != 3 * dims.area())
        throw ValidationError("frame buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                              std::to_string(3 * dims.area()) + " for " + to_string(dims));
}

} // namespace roboaug
