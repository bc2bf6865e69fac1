#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "stainshift/color_math.hpp"
#include "stainshift/her2.hpp"
#include "stainshift/image.hpp"

namespace stainshift {

inline constexpr int kDefaultTileSize = 128;
inline constexpr int kMinTileSize = 32;
// Hematoxylin concentration painted inside every nucleus.
inline constexpr double kNucleusHematoxylin = 0.5;
inline constexpr double kMinNucleusRadius = 3.0;
inline constexpr double kMaxNucleusRadius = 5.0;
// Membrane ring thickness beyond the nucleus.
inline constexpr double kMembraneWidth = 3.0;
inline constexpr double kMinCompleteness = 0.6;
// Placement gives up after this many attempts per requested cell.
inline constexpr int kPlacementAttemptsPerCell = 100;

using ClassMix = std::array<double, kHer2ClassCount>;
inline constexpr ClassMix kBalancedClassMix{0.25, 0.25, 0.25, 0.25};

struct CellSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double nucleus_radius = 0.0;
  double membrane_radius = 0.0;
  Her2Class her2_class = Her2Class::kZero;
  double membrane_dab_intensity = 0.0;
  // Fraction of the ring, measured in angle from membrane_start_angle, that
  // carries DAB.
  double membrane_completeness = 1.0;
  double membrane_start_angle = 0.0;

  bool operator==(const CellSpec&) const = default;
};

struct SyntheticTile {
  RgbTile tile;
  StainMatrix truth_m;
  ConcentrationMap truth_c;
  std::vector<CellSpec> cells;
  LabelMap label_map;

  bool operator==(const SyntheticTile&) const = default;
};

// Non-overlapping cells inside a size x size tile, deterministic per seed.
// Throws kPlacementFailed after kPlacementAttemptsPerCell * cell_count
// rejected attempts.
std::vector<CellSpec> place_cells(std::uint64_t seed, int size, int cell_count,
                                  const ClassMix& class_mix);

// Ground-truth concentrations: hematoxylin in nuclei, DAB on the painted arc
// of each membrane ring, zero elsewhere (including any residual channel).
ConcentrationMap paint_concentrations(int size, const std::vector<CellSpec>& cells,
                                      const StainMatrix& m);
// Whole cell disk (nucleus and ring) labelled with the cell's class.
LabelMap paint_labels(int size, const std::vector<CellSpec>& cells);

SyntheticTile generate_tile(std::uint64_t seed, int size, const ReferenceProfile& profile,
                            int cell_count, const ClassMix& class_mix);

// Both tiles share cells, concentrations and labels; only the stain matrix
// and white point differ.
std::pair<SyntheticTile, SyntheticTile> generate_paired_domains(
    std::uint64_t seed, int size, const ReferenceProfile& profile_a,
    const ReferenceProfile& profile_b, int cell_count, const ClassMix& class_mix);

// Unit vector at exactly `angle` radians from v, turned toward the component
// of `direction` orthogonal to v.
Eigen::Vector3d rotate_toward(const Eigen::Vector3d& v, const Eigen::Vector3d& direction,
                              double angle);

// Random stain domain near `base`: hematoxylin and DAB each turned by a
// uniform angle in [0, max_angle] in a random direction, residual recompleted,
// white point drawn per channel from [min_white, 255].
ReferenceProfile random_domain(const ReferenceProfile& base, std::string domain_id,
                               std::uint64_t seed, double max_angle, double min_white);

// The two fixed synthetic brands used by the CLI and the examples.
ReferenceProfile synthetic_brand_a();
ReferenceProfile synthetic_brand_b();

}  // namespace stainshift
