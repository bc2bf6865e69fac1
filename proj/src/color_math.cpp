#include "stainshift/color_math.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "stainshift/error.hpp"

namespace stainshift {

StainMatrix::StainMatrix(StainColumns columns, std::vector<std::string> names)
    : columns_(std::move(columns)), names_(std::move(names)) {
  const auto n = columns_.cols();
  if (n < 1 || n > 3) {
    throw Error(ErrorKind::kInvalidArgument,
                "stain matrix must have 1..3 columns, got " + std::to_string(n));
  }
  if (names_.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::kInvalidArgument, "stain name count does not match column count");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto col = columns_.col(k);
    if (!col.allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, "stain vector '" + names_[k] + "' is not finite");
    }
    if ((col.array() < 0.0).any()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "stain vector '" + names_[k] + "' has a negative component");
    }
    if (std::abs(col.norm() - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorKind::kInvalidArgument,
                  "stain vector '" + names_[k] + "' is not unit norm");
    }
  }
}

StainMatrix StainMatrix::from_vectors(const StainColumns& raw, std::vector<std::string> names) {
  StainColumns cols = raw;
  for (Eigen::Index k = 0; k < cols.cols(); ++k) {
    const double norm = cols.col(k).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::kInvalidArgument, "stain vector has zero or non-finite norm");
    }
    cols.col(k) /= norm;
  }
  return StainMatrix(std::move(cols), std::move(names));
}

std::optional<int> StainMatrix::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < names_.size(); ++k) {
    if (names_[k] == name) return static_cast<int>(k);
  }
  return std::nullopt;
}

void ReferenceProfile::validate() const {
  if (domain_id.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "profile domain_id must be non-empty");
  }
  validate_white_point(white_point);
}

Eigen::Vector3d complete_residual(const Eigen::Vector3d& first, const Eigen::Vector3d& second) {
  Eigen::Vector3d cross = first.cross(second);
  const double positive = cross.cwiseMax(0.0).sum();
  const double negative = (-cross).cwiseMax(0.0).sum();
  if (negative > positive) cross = -cross;
  cross = cross.cwiseMax(0.0);
  const double norm = cross.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorKind::kRankDeficient, "cannot complete residual of parallel stain vectors");
  }
  return cross / norm;
}

ReferenceProfile default_her2_profile() {
  const Eigen::Vector3d hematoxylin = Eigen::Vector3d(0.650, 0.704, 0.286).normalized();
  const Eigen::Vector3d dab = Eigen::Vector3d(0.268, 0.570, 0.776).normalized();
  StainColumns cols(3, 3);
  cols.col(0) = hematoxylin;
  cols.col(1) = dab;
  cols.col(2) = complete_residual(hematoxylin, dab);
  return ReferenceProfile{"her2_default", StainMatrix::from_vectors(cols, kHer2StainNames),
                          kDefaultWhitePoint, "built-in hematoxylin/DAB vectors"};
}

double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

OdImage rgb_to_od(const RgbTile& tile) {
  OdImage od(tile.width(), tile.height());
  const auto& white = tile.white_point();
  std::array<double, 3> log_white{};
  for (int c = 0; c < 3; ++c) log_white[c] = std::log10(white[c] + kOdGuard);

  // Only 256 distinct intensities per channel.
  std::array<std::array<double, 256>, 3> table{};
  for (int c = 0; c < 3; ++c) {
    for (int p = 0; p < 256; ++p) {
      table[c][p] = std::max(0.0, log_white[c] - std::log10(p + kOdGuard));
    }
  }

  const auto src = tile.pixels();
  auto dst = od.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = table[i % 3][src[i]];
  return od;
}

RgbTile od_to_rgb(const OdImage& od, const WhitePoint& white) {
  validate_white_point(white);
  if (!od.all_finite()) {
    throw Error(ErrorKind::kInvalidImage, "optical density image contains non-finite values");
  }
  const auto src = od.values();
  std::vector<std::uint8_t> pixels(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double scale = white[i % 3] + kOdGuard;
    const double p = std::round(scale * std::pow(10.0, -src[i]) - kOdGuard);
    pixels[i] = static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
  }
  return RgbTile(od.width(), od.height(), std::move(pixels), white);
}

UnmixingOperator pseudo_inverse(const StainMatrix& m) {
  const auto& cols = m.columns();
  const int n = m.stain_count();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (vector_angle(cols.col(a), cols.col(b)) < kParallelAngle) {
        throw Error(ErrorKind::kRankDeficient, "stain vectors '" + m.names()[a] + "' and '" +
                                                   m.names()[b] + "' are parallel");
      }
    }
  }

  // Thin QR: M = Q R with R upper triangular n x n, so M^+ = R^{-1} Q^T.
  const Eigen::HouseholderQR<StainColumns> qr(cols);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k) {
    if (std::abs(r(k, k)) < 1e-12 * scale) {
      throw Error(ErrorKind::kRankDeficient, "stain vectors are linearly dependent");
    }
  }
  const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(3, n);
  const Eigen::MatrixXd p =
      r.triangularView<Eigen::Upper>().solve(thin_q.transpose());
  return UnmixingOperator(p);
}

ConcentrationMap deconvolve(const OdImage& od, const UnmixingOperator& unmix) {
  const int n = static_cast<int>(unmix.rows());
  ConcentrationMap c(od.width(), od.height(), n);
  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    const Eigen::Map<const Eigen::Vector3d> y(od.pixel(i).data());
    Eigen::Map<Eigen::VectorXd> out(c.pixel(i).data(), n);
    out.noalias() = unmix * y;
  }
  return c;
}

ConcentrationMap deconvolve(const OdImage& od, const StainMatrix& m) {
  return deconvolve(od, pseudo_inverse(m));
}

OdImage recompose(const ConcentrationMap& c, const StainMatrix& m) {
  const int n = m.stain_count();
  if (c.channels() != n) {
    throw Error(ErrorKind::kChannelMismatch,
                "concentration map has " + std::to_string(c.channels()) +
                    " channels but stain matrix has " + std::to_string(n));
  }
  OdImage od(c.width(), c.height());
  const auto& cols = m.columns();
  for (std::size_t i = 0; i < c.pixel_count(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> conc(c.pixel(i).data(), n);
    Eigen::Map<Eigen::Vector3d> y(od.pixel(i).data());
    y.noalias() = cols * conc;
  }
  return od;
}

OdImage linear_transfer_od(const RgbTile& tile, const ReferenceProfile& source,
                           const ReferenceProfile& target) {
  source.validate();
  target.validate();
  return recompose(deconvolve(rgb_to_od(tile), source.stain_matrix), target.stain_matrix);
}

RgbTile linear_transfer(const RgbTile& tile, const ReferenceProfile& source,
                        const ReferenceProfile& target) {
  return od_to_rgb(linear_transfer_od(tile, source, target), target.white_point);
}

}  // namespace stainshift
