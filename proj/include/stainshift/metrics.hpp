#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stainshift/color_math.hpp"
#include "stainshift/her2.hpp"
#include "stainshift/image.hpp"

namespace stainshift {

// Built-in tile descriptor, layout version 1:
//   [0..2]  mean optical density per RGB channel
//   [3..5]  population variance of optical density per RGB channel
//   [6..8]  mean concentration per stain under default_her2_profile()
//   [9]     mean gradient magnitude of the channel-averaged optical density
//           (forward differences)
inline constexpr int kFeatureVersion = 1;
inline constexpr int kFeatureDim = 10;

using FeatureVector = Eigen::VectorXd;

FeatureVector extract_features(const OdImage& od);
FeatureVector extract_features(const RgbTile& tile);

struct FeatureSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t sample_count = 0;

  int feature_dim() const noexcept { return static_cast<int>(mean.size()); }
  // Symmetric within 1e-9, eigenvalues >= -1e-8, at least two samples.
  void validate() const;
};

// Sample mean and unbiased covariance.
FeatureSummary summarize(std::span<const FeatureVector> features);

// Squared Frechet distance between Gaussian fits:
//   |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
// The trace of the square root is taken from the eigenvalues of the
// symmetric matrix S_a^{1/2} S_b S_a^{1/2}, which has the same spectrum as
// S_a S_b. Eigenvalues below -1e-6 raise kNotPsd; smaller negatives clamp to 0.
double frechet_distance(const FeatureSummary& a, const FeatureSummary& b);

// Pixel-level confusion counts over non-background truth pixels. Rows are the
// truth class, columns the predicted label (0 = predicted background).
class ConfusionMatrix {
 public:
  void add(const LabelMap& predicted, const LabelMap& truth);

  std::uint64_t count(Her2Class truth, std::uint8_t predicted_label) const {
    return counts_[static_cast<std::size_t>(truth)][predicted_label];
  }
  std::uint64_t support(Her2Class truth) const;
  std::uint64_t total_support() const;
  std::size_t images() const noexcept { return images_; }

 private:
  std::array<std::array<std::uint64_t, 5>, kHer2ClassCount> counts_{};
  std::size_t images_ = 0;
};

struct EvalReport {
  std::optional<double> frechet_distance;
  double weighted_f1 = 0.0;
  std::array<double, kHer2ClassCount> per_class_f1{};
  std::array<std::uint64_t, kHer2ClassCount> support{};
  std::size_t n_images = 0;
};

// Per-class F1 (0 when precision + recall = 0) and their truth-support
// weighted mean. Throws kNoCells when the truth has no labelled pixels.
EvalReport f1_report(const ConfusionMatrix& confusion);
EvalReport weighted_f1(const LabelMap& predicted, const LabelMap& truth);
EvalReport weighted_f1(std::span<const std::pair<LabelMap, LabelMap>> predicted_truth);

// Thresholds on membrane DAB separating classes 0 | 1+ | 2+ | 3+, halfway
// between the generator intensities.
inline constexpr std::array<double, 3> kDabClassThresholds{0.15, 0.5, 0.95};
// Quantile of a cell's DAB concentrations taken as its membrane signal.
inline constexpr double kMembraneQuantile = 0.75;

// Stand-in cell classifier: each 4-connected non-background region of
// `regions` is one cell, graded by the kMembraneQuantile quantile of its DAB
// concentrations. Returns a label map over the same regions.
LabelMap classify_cells(const ConcentrationMap& concentrations, int dab_channel,
                        const LabelMap& regions);

}  // namespace stainshift
