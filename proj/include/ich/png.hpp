#pragma once

// 8-bit grayscale PNG encoding (zlib-compressed, no filtering).

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ich/core.hpp"

namespace ich {

namespace detail {

inline void put_be32(std::string& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

inline void put_chunk(std::string& out, const char* type, const std::string& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    put_be32(out, static_cast<std::uint32_t>(
                      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace detail

/// Encodes a width x height grayscale image (row-major bytes) as PNG.
inline std::string encode_png_gray(const std::vector<std::uint8_t>& pixels, std::size_t width, std::size_t height) {
    if (pixels.size() != width * height) throw ConfigError("pixel buffer does not match image size");
    std::string raw;
    raw.reserve(height * (width + 1));
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back('\0');  // filter type: none
        raw.append(reinterpret_cast<const char*>(&pixels[y * width]), width);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw DataError("PNG compression failed");
    compressed.resize(bound);

    std::string png("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    detail::put_be32(ihdr, static_cast<std::uint32_t>(width));
    detail::put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // depth 8, grayscale, deflate, no filter, no interlace
    detail::put_chunk(png, "IHDR", ihdr);
    detail::put_chunk(png, "IDAT", compressed);
    detail::put_chunk(png, "IEND", "");
    return png;
}

inline void write_png_gray(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                           std::size_t width, std::size_t height) {
    const std::string bytes = encode_png_gray(pixels, width, height);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace ich
