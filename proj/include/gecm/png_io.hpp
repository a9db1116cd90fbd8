#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gecm/image.hpp"
#include "gecm/raster.hpp"

namespace gecm {

/// Reads a PNG as grayscale in its native range (0..255 or 0..65535).
/// Palette and low-bit images are expanded, alpha is dropped, colour input
/// is converted with BT.601 luma (0.299 R + 0.587 G + 0.114 B).
/// Throws Error{FileNotFound} or Error{IoError}.
GrayImage read_png_gray(const std::filesystem::path& path);

/// Encodes with fixed settings (no timestamps, fixed compression), so equal
/// rasters always produce equal bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& img);
std::vector<std::uint8_t> encode_png(const ByteImage& gray);

void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_png(const std::filesystem::path& path, const ByteImage& gray);

/// Decodes an 8-bit RGB PNG produced by write_png (test and inspection helper).
RgbImage read_png_rgb(const std::filesystem::path& path);

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace gecm
