#include "stainshift/png_io.hpp"

#include <png.h>

#include <string>

#include "stainshift/error.hpp"
#include "stainshift/file_util.hpp"

namespace stainshift {
namespace {

// Owns a png_image and releases libpng state on scope exit.
struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> decode(std::span<const std::uint8_t> bytes, png_uint_32 format,
                                 int& width, int& height, png_uint_32* source_format) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::kImageDecode, std::string("cannot decode PNG: ") + png.image.message);
  }
  if (source_format != nullptr) *source_format = png.image.format;
  png.image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::kImageDecode, std::string("cannot decode PNG: ") + png.image.message);
  }
  width = static_cast<int>(png.image.width);
  height = static_cast<int>(png.image.height);
  return buffer;
}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, int width, int height,
                                 png_uint_32 format) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw Error(ErrorKind::kIo, std::string("cannot encode PNG: ") + png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw Error(ErrorKind::kIo, std::string("cannot encode PNG: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

RgbTile decode_png_rgb(std::span<const std::uint8_t> bytes, const WhitePoint& white) {
  int width = 0;
  int height = 0;
  auto pixels = decode(bytes, PNG_FORMAT_RGB, width, height, nullptr);
  return RgbTile(width, height, std::move(pixels), white);
}

std::vector<std::uint8_t> encode_png_rgb(const RgbTile& tile) {
  return encode(tile.pixels().data(), tile.width(), tile.height(), PNG_FORMAT_RGB);
}

LabelMap decode_png_labels(std::span<const std::uint8_t> bytes) {
  int width = 0;
  int height = 0;
  png_uint_32 source_format = 0;
  auto labels = decode(bytes, PNG_FORMAT_GRAY, width, height, &source_format);
  if (source_format != PNG_FORMAT_GRAY) {
    throw Error(ErrorKind::kImageDecode, "label maps must be 8-bit single-channel PNGs");
  }
  return LabelMap(width, height, std::move(labels));
}

std::vector<std::uint8_t> encode_png_labels(const LabelMap& labels) {
  return encode(labels.labels().data(), labels.width(), labels.height(), PNG_FORMAT_GRAY);
}

RgbTile read_png_rgb(const std::filesystem::path& path, const WhitePoint& white) {
  return decode_png_rgb(read_file_bytes(path), white);
}

void write_png_rgb(const RgbTile& tile, const std::filesystem::path& path) {
  write_file_atomic(path, encode_png_rgb(tile));
}

LabelMap read_png_labels(const std::filesystem::path& path) {
  return decode_png_labels(read_file_bytes(path));
}

void write_png_labels(const LabelMap& labels, const std::filesystem::path& path) {
  write_file_atomic(path, encode_png_labels(labels));
}

}  // namespace stainshift
