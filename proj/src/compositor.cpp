#include "roboaug/compositor.hpp"

#include "roboaug/errors.hpp"
#include "roboaug/kernels.hpp"

namespace roboaug {

namespace {

Dims dims_of(const Foreground& fg)
{
    return std::visit([](const auto& m) { return m.dims(); }, fg);
}

} // namespace

Frame composite(const Frame& frame, const Foreground& fg, const Frame& background)
{
    if (frame.dims() != background.dims() || frame.dims() != dims_of(fg))
        throw ValidationError("composite needs matching dims: frame " + to_string(frame.dims()) + ", mask " +
                              to_string(dims_of(fg)) + ", background " + to_string(background.dims()));
    Frame out(frame.dims());
    if (const auto* bin = std::get_if<BinaryMask>(&fg))
        kernels::select(frame.bytes(), bin->bits(), background.bytes(), out.bytes());
    else
        kernels::blend(frame.bytes(), std::get<SoftMask>(fg).alpha(), background.bytes(), out.bytes());
    return out;
}

AugFrame composite(const Frame& frame, const Foreground& fg, const Frame& background, Provenance provenance)
{
    return {composite(frame, fg, background), std::move(provenance)};
}

std::vector<AugFrame> composite_episode(std::span<const Frame> frames, std::span<const Foreground> fgs,
                                        std::span<const Frame> backgrounds, const Provenance& provenance)
{
    if (frames.size() != fgs.size() || frames.size() != backgrounds.size())
        throw ValidationError("composite_episode needs equal lengths: " + std::to_string(frames.size()) +
                              " frames, " + std::to_string(fgs.size()) + " masks, " +
                              std::to_string(backgrounds.size()) + " backgrounds");
    std::vector<AugFrame> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        try {
            out.push_back(composite(frames[i], fgs[i], backgrounds[i], provenance));
        } catch (const Error& e) {
            rethrow_with_context(e, "frame " + std::to_string(i));
        }
    }
    return out;
}

} // namespace roboaug
