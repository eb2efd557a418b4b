#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dynq/quantization.hpp"
#include "dynq/region.hpp"
#include "dynq/types.hpp"

namespace dynq {

/// Discrete events attached to the current region.
struct EventState {
  bool a = false;  // state entered the boundary band S_i \ S_i^omega
  bool b = false;  // region meets the obstacle set
  bool c = false;  // region meets the safe/target set

  friend bool operator==(const EventState&, const EventState&) = default;
};

/// Region generation parameters.
struct RegionPolicy {
  double omega = 0.1;
  double omega_in = 1.0;
  double omega_out = 1.0;
  /// Half-size of a region at mu = 1, per axis.
  Vec base_halfwidths;
  double mu0 = 1.0;
  double eta0 = 1.0;
  /// Align new boxes to their own lattice so every region with equal mu holds
  /// the same number of lattice points.
  bool snap_to_lattice = true;

  void validate() const;
};

enum class Zone { inside_core, boundary_band, outside };
std::string to_string(Zone z);

/// S_i^omega: the box shrunk by omega on every side.
/// Throws EmptyContractionError if an axis collapses.
Box contraction(const Region& r);

Zone classify(std::span<const double> x, const Region& r);

/// b and c from closed-box overlap with the obstacle / safe boxes; a is passed
/// through from the triggering classify() call.
EventState update_events(const Region& r, std::span<const Box> obstacles, std::span<const Box> safe,
                         bool a = false);

/// Hook raising PrecisionBreachError when (mu, eta) break the precision budget.
using PrecisionGuard = std::function<void(double mu, double eta)>;

/// mu_{i+1} = Omega_in mu_i if b or c, Omega_out mu_i otherwise (eta follows
/// the same factor); the new box has half-widths base_halfwidths * mu_{i+1}
/// and contains x_new in its contraction.
///
/// `lattice` (optional) supplies Lambda for snap_to_lattice.
Region next_region(std::span<const double> x_new, const Region& r, const EventState& e,
                   const RegionPolicy& policy, const ZoomQuantizer* lattice = nullptr,
                   const PrecisionGuard& guard = {});

/// S_0 built from the policy: the given box with mu0, eta0, omega.
Region initial_region(const Box& box, const RegionPolicy& policy);

}  // namespace dynq
