#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stainshift/image.hpp"

namespace stainshift {

// CMAP1 container, little-endian throughout:
//   bytes 0..5   magic "CMAP1\0"
//   bytes 6..9   width    (u32)
//   bytes 10..13 height   (u32)
//   bytes 14..17 channels (u32, 1..3)
//   payload      width*height*channels IEEE-754 binary32, row-major,
//                channel-interleaved (channel index fastest)
inline constexpr std::array<std::uint8_t, 6> kCmapMagic{'C', 'M', 'A', 'P', '1', '\0'};
inline constexpr std::size_t kCmapHeaderSize = 18;
inline constexpr std::uint32_t kCmapMaxSide = 1u << 16;

// Values are narrowed to binary32; a decode of the encoded bytes re-encodes
// to the same bytes.
std::vector<std::uint8_t> encode_cmap(const ConcentrationMap& map);

// Distinct error kinds: kBadMagic, kTruncated, kDimensionOverflow,
// kInvalidDimensions (zero side or channels outside 1..3), kTrailingData.
ConcentrationMap decode_cmap(std::span<const std::uint8_t> bytes);

void write_cmap(const ConcentrationMap& map, const std::filesystem::path& path);
ConcentrationMap read_cmap(const std::filesystem::path& path);

}  // namespace stainshift
