#pragma once

#include "roboaug/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roboaug {

namespace fs = std::filesystem;

// Color images decode to RGB regardless of the on-disk channel layout; alpha is
// dropped and gray is replicated. Gray images must be single channel.
Frame decode_frame(std::span<const std::uint8_t> encoded, std::string_view name);
std::vector<std::uint8_t> encode_png(const Frame& frame);
Frame read_frame(const fs::path& path);
void write_png(const Frame& frame, const fs::path& path);

GrayImage decode_gray(std::span<const std::uint8_t> encoded, std::string_view name);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
GrayImage read_gray(const fs::path& path);
void write_png(const GrayImage& image, const fs::path& path);

/// Width/height from the IHDR chunk without decoding pixel data.
Dims read_png_dims(const fs::path& path);

std::vector<std::uint8_t> read_file(const fs::path& path);
void write_file(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_file(const fs::path& path, std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// Content digest over dimensions and pixels.
std::string frame_digest(const Frame& frame);

} // namespace roboaug
