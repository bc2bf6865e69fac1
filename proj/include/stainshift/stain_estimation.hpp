#pragma once

#include <vector>

#include "stainshift/color_math.hpp"

namespace stainshift {

// Pixels whose every optical density is below this are considered blank.
inline constexpr double kBlankOdThreshold = 1e-4;
// Pixels whose every concentration is below this do not vote in the
// colour-vector update.
inline constexpr double kAssignmentThreshold = 1e-3;
// Columns with this name model noise and are never re-fitted.
inline constexpr const char* kResidualStainName = "residual";

struct EstimationConfig {
  int max_iters = 50;
  double tol = 1e-5;
  bool nonneg_concentrations = true;
  ReferenceProfile init;

  void validate() const;
};

struct EstimationResult {
  StainMatrix stain_matrix;
  ConcentrationMap concentrations;
  // ||Y - M C||_F after the seed solve, then after every accepted iteration.
  std::vector<double> objective_trace;
  int iterations_used = 0;
  bool converged = false;
};

ConcentrationMap project_nonneg(const ConcentrationMap& c);

// Frobenius norm of Y - M C over the whole image.
double reconstruction_residual(const OdImage& od, const StainMatrix& m,
                               const ConcentrationMap& c);

// Alternating projected least squares on ||Y - M C||_F, where M holds the
// non-residual columns only (the residual column is returned unchanged with
// zero concentration):
//   C-step: pseudo-inverse unmixing, optionally projected to C >= 0;
//   M-step: each column refit by least squares over the pixels
//           whose dominant concentration is that stain, projected to the
//           non-negative orthant and renormalized.
// A step that would raise the objective is rejected and ends the run, which
// keeps objective_trace non-increasing.
EstimationResult estimate_stains(const OdImage& od, const EstimationConfig& cfg);

// Convex combination of two profiles with matching stain names; each column
// renormalized. The result carries the domain and white point of whichever
// profile has the larger weight (a on ties), with a blended white point.
ReferenceProfile blend_profiles(const ReferenceProfile& a, const ReferenceProfile& b,
                                double beta_a, double beta_b);

}  // namespace stainshift
