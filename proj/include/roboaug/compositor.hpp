#pragma once

#include "roboaug/image.hpp"
#include "roboaug/mask.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace roboaug {

struct Provenance {
    std::string method;
    std::uint64_t seed = 0;
    std::optional<std::string> prompt;
    std::string backend;

    bool operator==(const Provenance&) const = default;
};

/// Augmented frame and a record of what produced its background.
struct AugFrame {
    Frame frame;
    Provenance provenance;
};

using Foreground = std::variant<BinaryMask, SoftMask>;

/// Binary: foreground pixels from `frame`, everything else from `background`.
/// Soft: round-half-up alpha blend per channel; alpha 1 copies `frame` exactly.
Frame composite(const Frame& frame, const Foreground& fg, const Frame& background);
AugFrame composite(const Frame& frame, const Foreground& fg, const Frame& background, Provenance provenance);

std::vector<AugFrame> composite_episode(std::span<const Frame> frames, std::span<const Foreground> fgs,
                                        std::span<const Frame> backgrounds, const Provenance& provenance = {});

} // namespace roboaug
