#include "stainshift/cmap_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "stainshift/error.hpp"
#include "stainshift/file_util.hpp"

namespace stainshift {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[offset + b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_cmap(const ConcentrationMap& map) {
  const auto w = static_cast<std::uint32_t>(map.width());
  const auto h = static_cast<std::uint32_t>(map.height());
  if (w > kCmapMaxSide || h > kCmapMaxSide) {
    throw Error(ErrorKind::kDimensionOverflow, "CMAP sides are limited to 65536 pixels");
  }
  if (!map.all_finite()) {
    throw Error(ErrorKind::kInvalidImage, "concentration map contains non-finite values");
  }
  std::vector<std::uint8_t> out(kCmapMagic.begin(), kCmapMagic.end());
  out.reserve(kCmapHeaderSize + 4 * map.values().size());
  put_u32(out, w);
  put_u32(out, h);
  put_u32(out, static_cast<std::uint32_t>(map.channels()));
  for (double v : map.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

ConcentrationMap decode_cmap(std::span<const std::uint8_t> bytes) {
  const std::size_t magic_len = std::min(bytes.size(), kCmapMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + magic_len, kCmapMagic.begin())) {
    throw Error(ErrorKind::kBadMagic, "bad magic: not a CMAP1 file");
  }
  if (bytes.size() < kCmapHeaderSize) {
    throw Error(ErrorKind::kTruncated, "truncated CMAP header");
  }
  const std::uint32_t w = get_u32(bytes, 6);
  const std::uint32_t h = get_u32(bytes, 10);
  const std::uint32_t c = get_u32(bytes, 14);
  if (w > kCmapMaxSide || h > kCmapMaxSide) {
    throw Error(ErrorKind::kDimensionOverflow,
                "CMAP dimensions " + std::to_string(w) + "x" + std::to_string(h) +
                    " exceed 65536");
  }
  if (w == 0 || h == 0 || c < 1 || c > 3) {
    throw Error(ErrorKind::kInvalidDimensions,
                "CMAP dimensions must be non-zero with 1..3 channels");
  }
  const std::uint64_t count = std::uint64_t{w} * h * c;
  const std::uint64_t payload = bytes.size() - kCmapHeaderSize;
  if (payload < 4 * count) {
    throw Error(ErrorKind::kTruncated, "truncated CMAP payload: expected " +
                                           std::to_string(4 * count) + " bytes, found " +
                                           std::to_string(payload));
  }
  if (payload > 4 * count) {
    throw Error(ErrorKind::kTrailingData, "CMAP payload has trailing bytes");
  }
  std::vector<double> values(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kCmapHeaderSize + 4 * i));
  }
  ConcentrationMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c),
                       std::move(values));
  if (!map.all_finite()) {
    throw Error(ErrorKind::kInvalidImage, "CMAP payload contains non-finite values");
  }
  return map;
}

void write_cmap(const ConcentrationMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_cmap(map));
}

ConcentrationMap read_cmap(const std::filesystem::path& path) {
  return decode_cmap(read_file_bytes(path));
}

}  // namespace stainshift
