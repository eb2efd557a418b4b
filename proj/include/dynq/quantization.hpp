#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynq/region.hpp"
#include "dynq/types.hpp"

namespace dynq {

/// Zoom quantizer Q_mu(z) = mu q(z / mu) applied per axis, with range index
/// M, per-axis granularity Lambda_l and dead-zone radius Lambda0.
struct ZoomQuantizer {
  int M = 1;
  Vec lambda;
  double lambda0 = 0.0;
  double mu = 1.0;
  /// Divide the spacing by sqrt(n) (Euclidean-ball covering variant).
  bool sqrt_n_spacing = false;

  ZoomQuantizer() = default;
  ZoomQuantizer(int M_, Vec lambda_, double lambda0_ = 0.0, double mu_ = 1.0);

  std::size_t dim() const { return lambda.size(); }
  /// Lattice pitch on `axis` at the current mu.
  double step(std::size_t axis) const;
  double lambda_max() const;
  ZoomQuantizer with_mu(double new_mu) const;
  void validate() const;
};

double zoom_quantize_scalar(const ZoomQuantizer& qz, std::size_t axis, double z);
/// Integer index k of the cell holding z on `axis`, clamped to [-M, M].
int zoom_index(const ZoomQuantizer& qz, std::size_t axis, double z);
Vec zoom_quantize(const ZoomQuantizer& qz, std::span<const double> z);
std::vector<int> zoom_indices(const ZoomQuantizer& qz, std::span<const double> z);

/// Point k * Lambda * mu_i of the lattice attached to region `region_id`.
struct LatticePoint {
  int region_id = 0;
  std::vector<int> k;
  Vec coords;

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) {
    return a.region_id == b.region_id && a.k == b.k;
  }
};

LatticePoint make_lattice_point(const ZoomQuantizer& qz, int region_id, std::vector<int> k);

/// All lattice points of the closed box, lexicographic in k. Uses qz.mu.
/// Throws RangeExceededError if the box needs |k_l| > M.
std::vector<LatticePoint> lattice_points(const Box& box, int region_id, const ZoomQuantizer& qz);
/// Same, at the region's own mu.
std::vector<LatticePoint> lattice_points(const Region& region, const ZoomQuantizer& qz);

/// Number of lattice points of the box ignoring the range M (used for the
/// uniform-grid comparator).
std::size_t lattice_count(const Box& box, const ZoomQuantizer& qz);

/// Per-axis inclusive index range [first, last] of lattice nodes in [lo, hi].
std::pair<long, long> axis_index_range(double lo, double hi, double step);

/// True iff every vertex of a grid of pitch radius/4 over the box lies within
/// infinity distance `radius` of some point.
bool cover_check(const Box& box, std::span<const LatticePoint> pts, double radius);

}  // namespace dynq
