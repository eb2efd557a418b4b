#pragma once

#include "dynq/types.hpp"

namespace dynq {

/// A locally abstracted patch S_i: a closed box with its own zoom parameter
/// mu_i, input-lattice parameter eta_i and contraction width omega.
struct Region {
  int id = 0;
  Box box;
  double mu = 1.0;
  double eta = 1.0;
  double omega = 0.1;

  friend bool operator==(const Region&, const Region&) = default;
};

}  // namespace dynq
