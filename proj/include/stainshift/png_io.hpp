#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stainshift/image.hpp"

namespace stainshift {

// Decodes any PNG to 8-bit RGB. The white point is metadata the file does not
// carry, so the caller supplies it.
RgbTile decode_png_rgb(std::span<const std::uint8_t> bytes,
                       const WhitePoint& white = kDefaultWhitePoint);
std::vector<std::uint8_t> encode_png_rgb(const RgbTile& tile);

// Label maps must be 8-bit single-channel PNGs with values 0..4.
LabelMap decode_png_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png_labels(const LabelMap& labels);

RgbTile read_png_rgb(const std::filesystem::path& path,
                     const WhitePoint& white = kDefaultWhitePoint);
void write_png_rgb(const RgbTile& tile, const std::filesystem::path& path);
LabelMap read_png_labels(const std::filesystem::path& path);
void write_png_labels(const LabelMap& labels, const std::filesystem::path& path);

}  // namespace stainshift
