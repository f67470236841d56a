#include "roboaug/image_io.hpp"

#include "roboaug/errors.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace roboaug {

namespace {

cv::Mat decode_raw(std::span<const std::uint8_t> encoded, std::string_view name)
{
    if (encoded.empty())
        throw ValidationError("cannot decode image '" + std::string(name) + "': empty buffer");
    const cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
    cv::Mat img = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    if (img.empty())
        throw ValidationError("cannot decode image '" + std::string(name) + "'");
    if (img.depth() != CV_8U)
        throw ValidationError("image '" + std::string(name) + "' is not 8-bit");
    return img;
}

std::vector<std::uint8_t> encode_mat(const cv::Mat& mat)
{
    std::vector<std::uint8_t> out;
    const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6};
    if (!cv::imencode(".png", mat, out, params))
        throw IoError("PNG encoding failed");
    return out;
}

} // namespace

Frame decode_frame(std::span<const std::uint8_t> encoded, std::string_view name)
{
    cv::Mat img = decode_raw(encoded, name);
    const int channels = img.channels();
    const Dims dims{img.cols, img.rows};
    std::vector<std::uint8_t> rgb(3 * dims.area());
    for (int y = 0; y < img.rows; ++y) {
        const std::uint8_t* row = img.ptr<std::uint8_t>(y);
        for (int x = 0; x < img.cols; ++x) {
            std::uint8_t* dst = &rgb[3 * (static_cast<std::size_t>(y) * dims.width + x)];
            const std::uint8_t* src = row + static_cast<std::size_t>(x) * channels;
            if (channels == 1) {
                dst[0] = dst[1] = dst[2] = src[0];
            } else {
                // OpenCV stores BGR(A).
                dst[0] = src[2];
                dst[1] = src[1];
                dst[2] = src[0];
            }
        }
    }
    return Frame(dims, std::move(rgb));
}

std::vector<std::uint8_t> encode_png(const Frame& frame)
{
    cv::Mat bgr(frame.height(), frame.width(), CV_8UC3);
    const auto src = frame.bytes();
    for (int y = 0; y < frame.height(); ++y) {
        std::uint8_t* row = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < frame.width(); ++x) {
            const std::size_t i = 3 * (static_cast<std::size_t>(y) * frame.width() + x);
            row[3 * x] = src[i + 2];
            row[3 * x + 1] = src[i + 1];
            row[3 * x + 2] = src[i];
        }
    }
    return encode_mat(bgr);
}

Frame read_frame(const fs::path& path)
{
    const auto bytes = read_file(path);
    return decode_frame(bytes, path.string());
}

void write_png(const Frame& frame, const fs::path& path)
{
    write_file(path, encode_png(frame));
}

GrayImage decode_gray(std::span<const std::uint8_t> encoded, std::string_view name)
{
    cv::Mat img = decode_raw(encoded, name);
    if (img.channels() != 1)
        throw ValidationError("mask '" + std::string(name) + "' has " + std::to_string(img.channels()) +
                              " channels, expected 1");
    GrayImage out{{img.cols, img.rows}, {}};
    out.values.resize(out.dims.area());
    for (int y = 0; y < img.rows; ++y) {
        const std::uint8_t* row = img.ptr<std::uint8_t>(y);
        std::copy(row, row + img.cols, out.values.begin() + static_cast<std::ptrdiff_t>(y) * img.cols);
    }
    return out;
}

std::vector<std::uint8_t> encode_png(const GrayImage& image)
{
    if (image.values.size() != image.dims.area())
        throw ValidationError("gray image buffer size does not match " + to_string(image.dims));
    const cv::Mat mat(image.dims.height, image.dims.width, CV_8UC1, const_cast<std::uint8_t*>(image.values.data()));
    return encode_mat(mat);
}

GrayImage read_gray(const fs::path& path)
{
    const auto bytes = read_file(path);
    return decode_gray(bytes, path.string());
}

void write_png(const GrayImage& image, const fs::path& path)
{
    write_file(path, encode_png(image));
}

Dims read_png_dims(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::array<unsigned char, 24> head{};
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    static constexpr std::array<unsigned char, 8> signature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (in.gcount() != static_cast<std::streamsize>(head.size()) ||
        !std::equal(signature.begin(), signature.end(), head.begin()) ||
        std::string_view(reinterpret_cast<const char*>(&head[12]), 4) != "IHDR")
        throw ValidationError("'" + path.string() + "' is not a PNG file");
    auto be32 = [&](int at) {
        return static_cast<int>((std::uint32_t{head[at]} << 24) | (std::uint32_t{head[at + 1]} << 16) |
                                (std::uint32_t{head[at + 2]} << 8) | std::uint32_t{head[at + 3]});
    };
    return {be32(16), be32(20)};
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to " + path.string());
}

void write_file(const fs::path& path, std::string_view text)
{
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    std::string clean;
    clean.reserve(text.size());
    for (char c : text)
        if (c != '\n' && c != '\r' && c != ' ')
            clean.push_back(c);
    if (clean.size() % 4 != 0)
        throw ProtocolError("invalid base64 payload length " + std::to_string(clean.size()));
    std::vector<std::uint8_t> out(3 * clean.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                  static_cast<int>(clean.size()));
    if (n < 0)
        throw ProtocolError("invalid base64 payload");
    // EVP_DecodeBlock keeps the bytes produced by '=' padding.
    std::size_t pad = 0;
    if (!clean.empty() && clean.back() == '=')
        ++pad;
    if (clean.size() > 1 && clean[clean.size() - 2] == '=')
        ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes)
{
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(bytes.data(), bytes.size(), md.data());
    std::string hex;
    hex.reserve(2 * md.size());
    static constexpr char digits[] = "0123456789abcdef";
    for (unsigned char c : md) {
        hex.push_back(digits[c >> 4]);
        hex.push_back(digits[c & 15]);
    }
    return hex;
}

std::string frame_digest(const Frame& frame)
{
    std::vector<std::uint8_t> buf(8 + frame.bytes().size());
    const auto w = static_cast<std::uint32_t>(frame.width());
    const auto h = static_cast<std::uint32_t>(frame.height());
    for (int i = 0; i < 4; ++i) {
        buf[i] = static_cast<std::uint8_t>(w >> (8 * i));
        buf[4 + i] = static_cast<std::uint8_t>(h >> (8 * i));
    }
    std::copy(frame.bytes().begin(), frame.bytes().end(), buf.begin() + 8);
    return sha256_hex(buf);
}

} // namespace roboaug
