#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/image.hpp"

namespace ap::io {

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or JPEG; format sniffed from the signature.
/// 16-bit samples are reduced to [0,1] at full precision. Gray+alpha loads as RGBA.
RasterImage read_image(const std::filesystem::path& path);

/// 8-bit PNG with the image's channel count (1, 3 or 4).
void write_png(const std::filesystem::path& path, const RasterImage& image);

/// Raw 16-bit grayscale samples, row-major.
struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

/// Accepts only single-channel 16-bit PNGs; anything else is a format error.
Gray16 read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const Gray16& image);

/// 1-bit grayscale PNG; nonzero entries are written as white.
void write_png_mask(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> read_png_mask(const std::filesystem::path& path, int& width, int& height);

/// Write-to-temp then rename, so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ap::io
