#include "stainshift/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "stainshift/error.hpp"

namespace stainshift {

FeatureVector extract_features(const OdImage& od) {
  FeatureVector f = FeatureVector::Zero(kFeatureDim);
  const std::size_t n = od.pixel_count();
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto y = od.pixel(i);
    for (int c = 0; c < 3; ++c) f[c] += y[c];
  }
  f.head<3>() *= inv_n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = od.pixel(i);
    for (int c = 0; c < 3; ++c) f[3 + c] += (y[c] - f[c]) * (y[c] - f[c]);
  }
  f.segment<3>(3) *= inv_n;

  // Mean concentrations are linear in the mean density.
  static const UnmixingOperator unmix = pseudo_inverse(default_her2_profile().stain_matrix);
  f.segment<3>(6) = unmix * Eigen::Vector3d(f.head<3>());

  const int w = od.width();
  const int h = od.height();
  if (w > 1 && h > 1) {
    auto gray = [&](int x, int y) {
      return (od.at(x, y, 0) + od.at(x, y, 1) + od.at(x, y, 2)) / 3.0;
    };
    double sum = 0.0;
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        const double g = gray(x, y);
        sum += std::hypot(gray(x + 1, y) - g, gray(x, y + 1) - g);
      }
    }
    f[9] = sum / (static_cast<double>(w - 1) * static_cast<double>(h - 1));
  }
  return f;
}

FeatureVector extract_features(const RgbTile& tile) { return extract_features(rgb_to_od(tile)); }

void FeatureSummary::validate() const {
  const auto d = mean.size();
  if (sample_count < 2) throw Error(ErrorKind::kInvalidArgument, "summary needs >= 2 samples");
  if (covariance.rows() != d || covariance.cols() != d) {
    throw Error(ErrorKind::kDimensionMismatch, "covariance shape does not match mean");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorKind::kNotPsd, "covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    throw Error(ErrorKind::kNotPsd, "covariance is not positive semidefinite");
  }
}

FeatureSummary summarize(std::span<const FeatureVector> features) {
  if (features.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "summarize needs at least 2 feature vectors");
  }
  const auto d = features.front().size();
  for (const auto& f : features) {
    if (f.size() != d) throw Error(ErrorKind::kDimensionMismatch, "feature dimensions differ");
  }
  const double n = static_cast<double>(features.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& f : features) mean += f;
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& f : features) {
    const Eigen::VectorXd centered = f - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= (n - 1.0);
  return FeatureSummary{std::move(mean), std::move(cov), features.size()};
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureSummary& a, const FeatureSummary& b) {
  if (a.feature_dim() != b.feature_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "feature dimensions differ: " + std::to_string(a.feature_dim()) + " vs " +
                    std::to_string(b.feature_dim()));
  }
  a.validate();
  b.validate();

  const Eigen::MatrixXd root_a = psd_sqrt(a.covariance);
  Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner, Eigen::EigenvaluesOnly);
  double trace_root = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()[i];
    if (lambda < -1e-6) {
      throw Error(ErrorKind::kNotPsd, "covariance product has a negative eigenvalue");
    }
    trace_root += std::sqrt(std::max(lambda, 0.0));
  }

  const double d2 = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                    b.covariance.trace() - 2.0 * trace_root;
  return std::max(d2, 0.0);
}

void ConfusionMatrix::add(const LabelMap& predicted, const LabelMap& truth) {
  if (predicted.width() != truth.width() || predicted.height() != truth.height()) {
    throw Error(ErrorKind::kDimensionMismatch, "predicted and truth label maps differ in size");
  }
  const auto p = predicted.labels();
  const auto t = truth.labels();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == LabelMap::kBackground) continue;
    ++counts_[t[i] - 1][p[i]];
  }
  ++images_;
}

std::uint64_t ConfusionMatrix::support(Her2Class truth) const {
  std::uint64_t s = 0;
  for (auto v : counts_[static_cast<std::size_t>(truth)]) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::total_support() const {
  std::uint64_t s = 0;
  for (int k = 0; k < kHer2ClassCount; ++k) s += support(static_cast<Her2Class>(k));
  return s;
}

EvalReport f1_report(const ConfusionMatrix& confusion) {
  const std::uint64_t total = confusion.total_support();
  if (total == 0) throw Error(ErrorKind::kNoCells, "no cells: truth is entirely background");

  EvalReport report;
  report.n_images = confusion.images();
  double weighted = 0.0;
  for (int k = 0; k < kHer2ClassCount; ++k) {
    const auto cls = static_cast<Her2Class>(k);
    const std::uint8_t label = label_of(cls);
    const std::uint64_t tp = confusion.count(cls, label);
    std::uint64_t predicted = 0;
    for (int t = 0; t < kHer2ClassCount; ++t) predicted += confusion.count(static_cast<Her2Class>(t), label);
    const std::uint64_t support = confusion.support(cls);

    const double precision = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
    const double recall = support > 0 ? static_cast<double>(tp) / support : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

    report.per_class_f1[k] = f1;
    report.support[k] = support;
    weighted += static_cast<double>(support) * f1;
  }
  report.weighted_f1 = weighted / static_cast<double>(total);
  return report;
}

EvalReport weighted_f1(const LabelMap& predicted, const LabelMap& truth) {
  ConfusionMatrix confusion;
  confusion.add(predicted, truth);
  return f1_report(confusion);
}

EvalReport weighted_f1(std::span<const std::pair<LabelMap, LabelMap>> predicted_truth) {
  ConfusionMatrix confusion;
  for (const auto& [predicted, truth] : predicted_truth) confusion.add(predicted, truth);
  return f1_report(confusion);
}

LabelMap classify_cells(const ConcentrationMap& concentrations, int dab_channel,
                        const LabelMap& regions) {
  if (concentrations.width() != regions.width() || concentrations.height() != regions.height()) {
    throw Error(ErrorKind::kDimensionMismatch, "concentration map and regions differ in size");
  }
  if (dab_channel < 0 || dab_channel >= concentrations.channels()) {
    throw Error(ErrorKind::kChannelMismatch, "DAB channel index out of range");
  }
  const int w = regions.width();
  const int h = regions.height();
  LabelMap out(w, h);
  std::vector<bool> visited(regions.pixel_count(), false);
  std::vector<std::pair<int, int>> stack;
  std::vector<std::pair<int, int>> members;
  std::vector<double> dab;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::uint8_t label = regions.at(sx, sy);
      const std::size_t start = static_cast<std::size_t>(sy) * w + sx;
      if (label == LabelMap::kBackground || visited[start]) continue;

      members.clear();
      dab.clear();
      stack.assign(1, {sx, sy});
      visited[start] = true;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        members.emplace_back(x, y);
        dab.push_back(concentrations.at(x, y, dab_channel));
        constexpr std::array<std::pair<int, int>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
        for (const auto& [dx, dy] : kSteps) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
          if (visited[idx] || regions.at(nx, ny) != label) continue;
          visited[idx] = true;
          stack.emplace_back(nx, ny);
        }
      }

      const auto q = static_cast<std::size_t>(kMembraneQuantile * static_cast<double>(dab.size() - 1));
      std::nth_element(dab.begin(), dab.begin() + q, dab.end());
      const double signal = dab[q];
      int grade = 0;
      for (double t : kDabClassThresholds) grade += signal >= t ? 1 : 0;
      const std::uint8_t predicted = label_of(static_cast<Her2Class>(grade));
      for (const auto& [x, y] : members) out.at(x, y) = predicted;
    }
  }
  return out;
}

}  // namespace stainshift
