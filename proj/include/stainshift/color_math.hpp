#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stainshift/image.hpp"

namespace stainshift {

// Guard added to intensities before taking logarithms, so that a zero
// intensity maps to a finite optical density.
inline constexpr double kOdGuard = 1.0;

// Two stain vectors closer than this angle (radians) are treated as parallel.
inline constexpr double kParallelAngle = 1e-6;

// Tolerance on the unit norm of stored stain columns.
inline constexpr double kUnitNormTolerance = 1e-6;

using StainColumns = Eigen::Matrix<double, 3, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using UnmixingOperator = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor, 3, 3>;

// 3 x n_s matrix of unit-norm, non-negative OD colour vectors, one per stain.
class StainMatrix {
 public:
  StainMatrix(StainColumns columns, std::vector<std::string> names);

  // Normalizes each column to unit length before validating.
  static StainMatrix from_vectors(const StainColumns& raw, std::vector<std::string> names);

  int stain_count() const noexcept { return static_cast<int>(columns_.cols()); }
  const StainColumns& columns() const noexcept { return columns_; }
  Eigen::Vector3d column(int k) const { return columns_.col(k); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<int> index_of(std::string_view name) const;

  bool operator==(const StainMatrix& other) const {
    return names_ == other.names_ && columns_ == other.columns_;
  }

 private:
  StainColumns columns_;
  std::vector<std::string> names_;
};

// A named stain domain (e.g. one stain brand).
struct ReferenceProfile {
  std::string domain_id;
  StainMatrix stain_matrix;
  WhitePoint white_point = kDefaultWhitePoint;
  std::string source;

  void validate() const;
  bool operator==(const ReferenceProfile&) const = default;
};

inline const std::vector<std::string> kHer2StainNames{"hematoxylin", "dab", "residual"};

// Third stain vector for a two-stain protocol: the cross product of the two
// given vectors, sign chosen to keep the larger positive mass, negative
// components clamped to zero, unit-normalized.
Eigen::Vector3d complete_residual(const Eigen::Vector3d& first, const Eigen::Vector3d& second);

// Brand-neutral hematoxylin/DAB profile with a completed residual channel.
ReferenceProfile default_her2_profile();

// Angle in radians between two (not necessarily unit) 3-vectors.
double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

OdImage rgb_to_od(const RgbTile& tile);
RgbTile od_to_rgb(const OdImage& od, const WhitePoint& white);

// Moore-Penrose pseudo-inverse of a full-column-rank stain matrix.
// Throws kRankDeficient when two columns are parallel or the columns are
// otherwise linearly dependent.
UnmixingOperator pseudo_inverse(const StainMatrix& m);

// Unconstrained per-pixel unmixing c = P y. Negative values are kept.
ConcentrationMap deconvolve(const OdImage& od, const StainMatrix& m);
ConcentrationMap deconvolve(const OdImage& od, const UnmixingOperator& unmix);

// Forward model y = M c per pixel.
OdImage recompose(const ConcentrationMap& c, const StainMatrix& m);

// Source concentrations recomposed with the target stain matrix, before
// conversion back to intensities.
OdImage linear_transfer_od(const RgbTile& tile, const ReferenceProfile& source,
                           const ReferenceProfile& target);

RgbTile linear_transfer(const RgbTile& tile, const ReferenceProfile& source,
                        const ReferenceProfile& target);

}  // namespace stainshift
