#pragma once

#include <span>
#include <vector>

#include "dynq/dynamics.hpp"
#include "dynq/quantization.hpp"
#include "dynq/region.hpp"

namespace dynq {

/// Inputs of U on a grid of pitch eta_i anchored at 0, lexicographic order.
struct InputLattice {
  int region_id = 0;
  double spacing = 1.0;
  std::vector<Vec> points;
};

InputLattice input_lattice(const Region& region, const Box& U);
/// Grid of the given pitch anchored at 0 over U.
std::vector<Vec> input_grid(const Box& U, double pitch);

struct ReachSample {
  Vec input;
  Vec endpoint;
  /// Endpoint left the region box; such samples trigger region generation.
  bool escapes = false;
};

/// Endpoints x(tau, q, u) of every lattice input from one abstract state.
struct ReachCloud {
  LatticePoint source;
  std::vector<ReachSample> samples;
  double tau = 0.0;
  double input_spacing = 1.0;
};

ReachCloud reach_cloud(const SampledSystem& sys, const LatticePoint& q, const InputLattice& lat,
                       const Region& region);

struct MenuEntry {
  /// y on the eta-lattice of the region (spacing Lambda_l * eta_i).
  std::vector<int> target_k;
  Vec target;
  /// psi(y).
  Vec input;
  Vec endpoint;
  double distance = 0.0;
};

/// Z_eta(tau, q) with the selector psi; entries ordered by target_k.
struct InputMenu {
  LatticePoint source;
  std::vector<MenuEntry> entries;
  double radius = 0.0;  // max_l Lambda_l * eta_i / 2
  double eta = 0.0;
  double input_spacing = 1.0;

  /// U_2(q): distinct selected inputs in lexicographic order.
  std::vector<Vec> inputs() const;
};

/// Throws EmptyMenuError if no eta-lattice point of the region is within the
/// radius of an endpoint.
InputMenu build_menu(const ReachCloud& cloud, const Region& region, const ZoomQuantizer& qz);

struct InputCoverReport {
  double max_gap = 0.0;
  double bound = 0.0;  // max_l Lambda_l * eta_i
  bool violated = false;
  std::size_t samples = 0;
};

/// Endpoints of inputs on a grid dense_factor times finer than the menu's
/// input lattice, compared against the menu's endpoints.
InputCoverReport verify_input_cover(const SampledSystem& sys, const LatticePoint& q,
                                    const Region& region, const InputMenu& menu,
                                    const ZoomQuantizer& qz, int dense_factor);

}  // namespace dynq
