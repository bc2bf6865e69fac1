#include "stainshift/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stainshift/error.hpp"

namespace stainshift {
namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kInvalidDimensions,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

std::size_t count(int width, int height, int channels) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
         static_cast<std::size_t>(channels);
}

}  // namespace

void validate_white_point(const WhitePoint& white) {
  for (double w : white) {
    if (!(w > 0.0 && w <= 255.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "white point components must lie in (0, 255], got " + std::to_string(w));
    }
  }
}

RgbTile::RgbTile(int width, int height, WhitePoint white)
    : width_(width), height_(height), white_(white) {
  check_dims(width, height);
  validate_white_point(white);
  pixels_.resize(count(width, height, 3));
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    pixels_[i] = static_cast<std::uint8_t>(std::lround(white[i % 3]));
  }
}

RgbTile::RgbTile(int width, int height, std::vector<std::uint8_t> pixels, WhitePoint white)
    : width_(width), height_(height), white_(white), pixels_(std::move(pixels)) {
  check_dims(width, height);
  validate_white_point(white);
  if (pixels_.size() != count(width, height, 3)) {
    throw Error(ErrorKind::kDimensionMismatch, "pixel buffer size does not match " +
                                                   std::to_string(width) + "x" +
                                                   std::to_string(height) + "x3");
  }
}

void RgbTile::set_white_point(const WhitePoint& white) {
  validate_white_point(white);
  white_ = white;
}

Raster::Raster(int width, int height, int channels)
    : Raster(width, height, channels, std::vector<double>(count(std::max(width, 0),
                                                                std::max(height, 0),
                                                                std::max(channels, 0)))) {}

Raster::Raster(int width, int height, int channels, std::vector<double> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  check_dims(width, height);
  if (channels < 1) {
    throw Error(ErrorKind::kInvalidDimensions, "raster needs at least one channel");
  }
  if (values_.size() != count(width, height, channels)) {
    throw Error(ErrorKind::kDimensionMismatch, "raster buffer size does not match dimensions");
  }
}

bool Raster::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ConcentrationMap::ConcentrationMap(int width, int height, int channels)
    : Raster(width, height, channels) {
  if (channels > 3) {
    throw Error(ErrorKind::kInvalidDimensions, "concentration maps carry 1..3 channels");
  }
}

ConcentrationMap::ConcentrationMap(int width, int height, int channels,
                                   std::vector<double> values)
    : Raster(width, height, channels, std::move(values)) {
  if (channels > 3) {
    throw Error(ErrorKind::kInvalidDimensions, "concentration maps carry 1..3 channels");
  }
}

LabelMap::LabelMap(int width, int height)
    : LabelMap(width, height,
               std::vector<std::uint8_t>(count(std::max(width, 0), std::max(height, 0), 1))) {}

LabelMap::LabelMap(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  check_dims(width, height);
  if (labels_.size() != count(width, height, 1)) {
    throw Error(ErrorKind::kDimensionMismatch, "label buffer size does not match dimensions");
  }
  for (auto v : labels_) {
    if (v > kMaxLabel) {
      throw Error(ErrorKind::kInvalidImage,
                  "label value " + std::to_string(v) + " outside 0..4");
    }
  }
}

}  // namespace stainshift
