#include "stainshift/synth_tiles.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stainshift/error.hpp"
#include "stainshift/random.hpp"

namespace stainshift {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_request(int size, int cell_count, const ClassMix& class_mix) {
  if (size < kMinTileSize) {
    throw Error(ErrorKind::kInvalidArgument,
                "tile size must be >= " + std::to_string(kMinTileSize));
  }
  if (cell_count < 0) throw Error(ErrorKind::kInvalidArgument, "cell_count must be >= 0");
  double total = 0.0;
  for (double p : class_mix) {
    if (!(p >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "class_mix entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "class_mix must sum to 1");
  }
}

struct StainChannels {
  int hematoxylin;
  int dab;
};

StainChannels stain_channels(const StainMatrix& m) {
  const auto h = m.index_of("hematoxylin");
  const auto d = m.index_of("dab");
  if (!h || !d) {
    throw Error(ErrorKind::kStainNameMismatch,
                "synthetic tiles need 'hematoxylin' and 'dab' stains in the profile");
  }
  return {*h, *d};
}

SyntheticTile render(const std::vector<CellSpec>& cells, const ConcentrationMap& truth_c,
                     const LabelMap& labels, const ReferenceProfile& profile) {
  profile.validate();
  RgbTile tile = od_to_rgb(recompose(truth_c, profile.stain_matrix), profile.white_point);
  return SyntheticTile{std::move(tile), profile.stain_matrix, truth_c, cells, labels};
}

}  // namespace

std::vector<CellSpec> place_cells(std::uint64_t seed, int size, int cell_count,
                                  const ClassMix& class_mix) {
  validate_request(size, cell_count, class_mix);
  Rng rng(seed);
  std::vector<CellSpec> cells;
  cells.reserve(static_cast<std::size_t>(cell_count));
  const long max_attempts = static_cast<long>(kPlacementAttemptsPerCell) * cell_count;
  long attempts = 0;
  while (static_cast<int>(cells.size()) < cell_count) {
    if (attempts++ >= max_attempts) {
      throw Error(ErrorKind::kPlacementFailed,
                  "could only place " + std::to_string(cells.size()) + " of " +
                      std::to_string(cell_count) + " cells in a " + std::to_string(size) +
                      "x" + std::to_string(size) + " tile");
    }
    CellSpec cell;
    cell.nucleus_radius = rng.uniform(kMinNucleusRadius, kMaxNucleusRadius);
    cell.membrane_radius = cell.nucleus_radius + kMembraneWidth;
    const double margin = cell.membrane_radius + 1.0;
    cell.center_x = rng.uniform(margin, size - 1.0 - margin);
    cell.center_y = rng.uniform(margin, size - 1.0 - margin);

    bool overlaps = false;
    for (const auto& other : cells) {
      // Two pixels of clearance keep every cell its own connected region.
      const double min_dist = cell.membrane_radius + other.membrane_radius + 2.0;
      if (std::hypot(cell.center_x - other.center_x, cell.center_y - other.center_y) < min_dist) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;

    cell.her2_class = static_cast<Her2Class>(rng.categorical(class_mix));
    cell.membrane_dab_intensity = membrane_dab_intensity(cell.her2_class);
    cell.membrane_completeness = rng.uniform(kMinCompleteness, 1.0);
    cell.membrane_start_angle = rng.uniform(0.0, kTwoPi);
    cells.push_back(cell);
  }
  return cells;
}

ConcentrationMap paint_concentrations(int size, const std::vector<CellSpec>& cells,
                                      const StainMatrix& m) {
  const auto [h, d] = stain_channels(m);
  ConcentrationMap c(size, size, m.stain_count());
  for (const auto& cell : cells) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cell.center_x - cell.membrane_radius)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cell.center_x + cell.membrane_radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cell.center_y - cell.membrane_radius)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cell.center_y + cell.membrane_radius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cell.center_x;
        const double dy = y - cell.center_y;
        const double r = std::hypot(dx, dy);
        if (r <= cell.nucleus_radius) {
          c.at(x, y, h) = kNucleusHematoxylin;
        } else if (r <= cell.membrane_radius) {
          double rel = std::atan2(dy, dx) - cell.membrane_start_angle;
          rel = std::fmod(rel, kTwoPi);
          if (rel < 0.0) rel += kTwoPi;
          if (rel < kTwoPi * cell.membrane_completeness) c.at(x, y, d) = cell.membrane_dab_intensity;
        }
      }
    }
  }
  return c;
}

LabelMap paint_labels(int size, const std::vector<CellSpec>& cells) {
  LabelMap labels(size, size);
  for (const auto& cell : cells) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (std::hypot(x - cell.center_x, y - cell.center_y) <= cell.membrane_radius) {
          labels.at(x, y) = label_of(cell.her2_class);
        }
      }
    }
  }
  return labels;
}

SyntheticTile generate_tile(std::uint64_t seed, int size, const ReferenceProfile& profile,
                            int cell_count, const ClassMix& class_mix) {
  stain_channels(profile.stain_matrix);
  const auto cells = place_cells(seed, size, cell_count, class_mix);
  return render(cells, paint_concentrations(size, cells, profile.stain_matrix),
                paint_labels(size, cells), profile);
}

std::pair<SyntheticTile, SyntheticTile> generate_paired_domains(
    std::uint64_t seed, int size, const ReferenceProfile& profile_a,
    const ReferenceProfile& profile_b, int cell_count, const ClassMix& class_mix) {
  if (profile_a.stain_matrix.names() != profile_b.stain_matrix.names()) {
    throw Error(ErrorKind::kStainNameMismatch, "paired profiles must list the same stains");
  }
  stain_channels(profile_a.stain_matrix);
  const auto cells = place_cells(seed, size, cell_count, class_mix);
  const auto truth_c = paint_concentrations(size, cells, profile_a.stain_matrix);
  const auto labels = paint_labels(size, cells);
  return {render(cells, truth_c, labels, profile_a), render(cells, truth_c, labels, profile_b)};
}

Eigen::Vector3d rotate_toward(const Eigen::Vector3d& v, const Eigen::Vector3d& direction,
                              double angle) {
  const Eigen::Vector3d u = v.normalized();
  Eigen::Vector3d w = direction - direction.dot(u) * u;
  const double norm = w.norm();
  if (!(norm > 1e-12)) {
    throw Error(ErrorKind::kInvalidArgument, "rotation direction is parallel to the vector");
  }
  w /= norm;
  return std::cos(angle) * u + std::sin(angle) * w;
}

ReferenceProfile random_domain(const ReferenceProfile& base, std::string domain_id,
                               std::uint64_t seed, double max_angle, double min_white) {
  const auto& m = base.stain_matrix;
  const auto [h, d] = stain_channels(m);
  Rng rng(seed);
  auto turn = [&](const Eigen::Vector3d& v) {
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    const double angle = rng.uniform(0.0, max_angle);
    return Eigen::Vector3d(rotate_toward(v, dir, angle).cwiseMax(0.0));
  };
  StainColumns cols = m.columns();
  cols.col(h) = turn(m.column(h)).normalized();
  cols.col(d) = turn(m.column(d)).normalized();
  if (const auto r = m.index_of("residual")) {
    cols.col(*r) = complete_residual(cols.col(h), cols.col(d));
  }
  WhitePoint white{};
  for (double& w : white) w = rng.uniform(min_white, 255.0);
  return ReferenceProfile{std::move(domain_id), StainMatrix::from_vectors(cols, m.names()),
                          white, "synthetic domain (seed " + std::to_string(seed) + ")"};
}

ReferenceProfile synthetic_brand_a() {
  return random_domain(default_her2_profile(), "brand_A", 0xA11CE, 0.08, 245.0);
}

ReferenceProfile synthetic_brand_b() {
  return random_domain(default_her2_profile(), "brand_B", 0xB0B, 0.08, 245.0);
}

}  // namespace stainshift
