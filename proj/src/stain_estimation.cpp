#include "stainshift/stain_estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "stainshift/error.hpp"

namespace stainshift {
namespace {

ConcentrationMap solve_concentrations(const OdImage& od, const StainMatrix& m, bool nonneg) {
  auto c = deconvolve(od, m);
  return nonneg ? project_nonneg(c) : c;
}

// Second index of the first pair of columns closer than kParallelAngle, or -1.
int collapsed_column(const StainColumns& cols) {
  for (int a = 0; a < cols.cols(); ++a) {
    for (int b = a + 1; b < cols.cols(); ++b) {
      if (vector_angle(cols.col(a), cols.col(b)) < kParallelAngle) return b;
    }
  }
  return -1;
}

// Least-squares refit of every column over the pixels it dominates, each
// such pixel modelled by its dominant stain alone. Subtracting the other
// columns' contributions instead leaves every matrix whose cone contains the
// data as a fixed point, so the in-plane directions would never move.
StainColumns refit_columns(const OdImage& od, const StainColumns& cols, const ConcentrationMap& c) {
  const int n = static_cast<int>(cols.cols());
  std::array<Eigen::Vector3d, 3> numer;
  std::array<double, 3> denom{};
  for (auto& v : numer) v.setZero();

  for (std::size_t i = 0; i < od.pixel_count(); ++i) {
    const auto conc = c.pixel(i);
    const auto dominant = std::max_element(conc.begin(), conc.end());
    if (*dominant < kAssignmentThreshold) continue;
    const int k = static_cast<int>(dominant - conc.begin());

    numer[k] += Eigen::Map<const Eigen::Vector3d>(od.pixel(i).data()) * conc[k];
    denom[k] += conc[k] * conc[k];
  }

  StainColumns next = cols;
  for (int k = 0; k < n; ++k) {
    if (!(denom[k] > 0.0)) continue;
    const Eigen::Vector3d fitted = (numer[k] / denom[k]).cwiseMax(0.0);
    const double norm = fitted.norm();
    if (norm > 1e-12 && std::isfinite(norm)) next.col(k) = fitted / norm;
  }
  return next;
}

}  // namespace

void EstimationConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorKind::kInvalidArgument, "max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::kInvalidArgument, "tol must be > 0");
  init.validate();
}

ConcentrationMap project_nonneg(const ConcentrationMap& c) {
  ConcentrationMap out = c;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

double reconstruction_residual(const OdImage& od, const StainMatrix& m,
                               const ConcentrationMap& c) {
  const auto model = recompose(c, m);
  double sum = 0.0;
  const auto a = od.values();
  const auto b = model.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

EstimationResult estimate_stains(const OdImage& od, const EstimationConfig& cfg) {
  cfg.validate();
  if (!od.all_finite()) {
    throw Error(ErrorKind::kInvalidImage, "optical density image contains non-finite values");
  }
  const auto values = od.values();
  if (std::all_of(values.begin(), values.end(),
                  [](double v) { return v < kBlankOdThreshold; })) {
    throw Error(ErrorKind::kBlankTile, "blank tile: no optical density above 1e-4");
  }

  // The residual column stays fixed and out of the fit. With it, three
  // columns span the whole OD space, every full-rank matrix reproduces the
  // image exactly and the objective cannot tell stain directions apart.
  const StainMatrix& seed = cfg.init.stain_matrix;
  std::vector<int> fitted;
  std::vector<std::string> fitted_names;
  for (int k = 0; k < seed.stain_count(); ++k) {
    if (seed.names()[k] == kResidualStainName) continue;
    fitted.push_back(k);
    fitted_names.push_back(seed.names()[k]);
  }
  if (fitted.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "seed profile has no stain besides the residual");
  }
  StainColumns seed_cols(3, static_cast<Eigen::Index>(fitted.size()));
  for (std::size_t j = 0; j < fitted.size(); ++j) seed_cols.col(j) = seed.column(fitted[j]);
  const StainMatrix seed_fit(seed_cols, fitted_names);

  double data_norm = 0.0;
  for (double v : values) data_norm += v * v;
  data_norm = std::sqrt(data_norm);
  const double exact_floor = 1e-12 * std::max(1.0, data_norm);

  StainMatrix current = seed_fit;
  ConcentrationMap conc = solve_concentrations(od, current, cfg.nonneg_concentrations);
  double objective = reconstruction_residual(od, current, conc);
  std::vector<double> trace{objective};
  int iterations = 0;
  bool converged = objective <= exact_floor;

  bool perturbed = false;
  for (int iter = 1; !converged && iter <= cfg.max_iters; ++iter) {
    iterations = iter;
    StainColumns cols = refit_columns(od, current.columns(), conc);

    if (int k = collapsed_column(cols); k >= 0) {
      if (perturbed) {
        throw Error(ErrorKind::kStainCollapse,
                    "stain column '" + fitted_names[k] + "' collapsed onto another column twice");
      }
      // Restart the collapsed column from its seed vector, once.
      perturbed = true;
      cols.col(k) = seed_fit.column(k);
      if (collapsed_column(cols) >= 0) {
        throw Error(ErrorKind::kStainCollapse, "stain columns collapsed to parallel vectors");
      }
    }

    StainMatrix candidate(cols, fitted_names);
    ConcentrationMap next_conc = solve_concentrations(od, candidate, cfg.nonneg_concentrations);
    const double next_objective = reconstruction_residual(od, candidate, next_conc);
    // A step that does not improve the fit ends the run, keeping the trace
    // monotone.
    if (!(next_objective <= objective)) {
      converged = true;
      break;
    }

    const double decrease = (objective - next_objective) / objective;
    current = std::move(candidate);
    conc = std::move(next_conc);
    objective = next_objective;
    trace.push_back(objective);
    converged = objective <= exact_floor || decrease < cfg.tol;
  }

  // Back to the seed's layout; the residual keeps its seed vector and a zero
  // concentration, so objective_trace.back() is exactly ||Y - M C||.
  StainColumns out_cols = seed.columns();
  ConcentrationMap out_conc(od.width(), od.height(), seed.stain_count());
  for (std::size_t j = 0; j < fitted.size(); ++j) {
    out_cols.col(fitted[j]) = current.column(static_cast<int>(j));
    for (std::size_t i = 0; i < od.pixel_count(); ++i) {
      out_conc.pixel(i)[fitted[j]] = conc.pixel(i)[j];
    }
  }
  return EstimationResult{StainMatrix(out_cols, seed.names()), std::move(out_conc), std::move(trace),
                          iterations, converged};
}

ReferenceProfile blend_profiles(const ReferenceProfile& a, const ReferenceProfile& b,
                                double beta_a, double beta_b) {
  if (!(beta_a >= 0.0) || !(beta_b >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "blend weights must be non-negative");
  }
  if (beta_a == 0.0 && beta_b == 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "blend weights are both zero");
  }
  if (std::abs(beta_a + beta_b - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "blend weights must sum to 1");
  }
  if (a.stain_matrix.names() != b.stain_matrix.names()) {
    throw Error(ErrorKind::kStainNameMismatch, "profiles list different stains");
  }

  const StainColumns mixed =
      beta_a * a.stain_matrix.columns() + beta_b * b.stain_matrix.columns();
  const ReferenceProfile& dominant = beta_a >= beta_b ? a : b;
  WhitePoint white{};
  for (int c = 0; c < 3; ++c) white[c] = beta_a * a.white_point[c] + beta_b * b.white_point[c];
  return ReferenceProfile{dominant.domain_id,
                          StainMatrix::from_vectors(mixed, a.stain_matrix.names()), white,
                          dominant.source};
}

}  // namespace stainshift
