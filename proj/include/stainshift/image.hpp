#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stainshift {

// Per-channel background intensity I0 of a transmitted-light image.
using WhitePoint = std::array<double, 3>;
inline constexpr WhitePoint kDefaultWhitePoint{255.0, 255.0, 255.0};

void validate_white_point(const WhitePoint& white);

// H x W x 3 interleaved 8-bit image. Channel values are in [0, 255] by
// construction of the storage type.
class RgbTile {
 public:
  // Background-filled tile (every channel set to the rounded white point).
  RgbTile(int width, int height, WhitePoint white = kDefaultWhitePoint);
  RgbTile(int width, int height, std::vector<std::uint8_t> pixels,
          WhitePoint white = kDefaultWhitePoint);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  const WhitePoint& white_point() const noexcept { return white_; }
  void set_white_point(const WhitePoint& white);

  std::uint8_t at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return pixels_[index(x, y, c)]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool operator==(const RgbTile&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  WhitePoint white_;
  std::vector<std::uint8_t> pixels_;
};

// H x W x channels interleaved real-valued raster (channel index fastest).
// Shared storage for optical-density images and concentration maps.
class Raster {
 public:
  Raster(int width, int height, int channels);
  Raster(int width, int height, int channels, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double at(int x, int y, int c) const { return values_[index(x, y, c)]; }
  double& at(int x, int y, int c) { return values_[index(x, y, c)]; }

  // Channel vector of the i-th pixel in row-major order.
  std::span<const double> pixel(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * channels_, channels_);
  }
  std::span<double> pixel(std::size_t i) {
    return std::span<double>(values_).subspan(i * channels_, channels_);
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool all_finite() const noexcept;

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * channels_ + static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  int channels_;
  std::vector<double> values_;
};

// Optical densities, always three channels (R, G, B).
class OdImage : public Raster {
 public:
  OdImage(int width, int height) : Raster(width, height, 3) {}
  OdImage(int width, int height, std::vector<double> values)
      : Raster(width, height, 3, std::move(values)) {}
};

// Per-pixel stain concentrations, one channel per stain (1..3).
class ConcentrationMap : public Raster {
 public:
  ConcentrationMap(int width, int height, int channels);
  ConcentrationMap(int width, int height, int channels, std::vector<double> values);
};

// Per-pixel cell label: 0 = background, 1..4 = HER2 classes 0, 1+, 2+, 3+.
class LabelMap {
 public:
  static constexpr std::uint8_t kBackground = 0;
  static constexpr std::uint8_t kMaxLabel = 4;

  LabelMap(int width, int height);
  LabelMap(int width, int height, std::vector<std::uint8_t> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return labels_.size(); }

  std::uint8_t at(int x, int y) const { return labels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return labels_[index(x, y)]; }

  std::span<const std::uint8_t> labels() const noexcept { return labels_; }

  bool operator==(const LabelMap&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> labels_;
};

}  // namespace stainshift
