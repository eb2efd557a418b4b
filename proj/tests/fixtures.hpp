#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dynq/abstraction.hpp"
#include "dynq/dynamics.hpp"
#include "dynq/planner.hpp"
#include "dynq/quantization.hpp"
#include "dynq/regions.hpp"

namespace fx {

inline const double kPi = std::acos(-1.0);

// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  dynq::Vec vec(std::size_t n, double lo, double hi) {
    dynq::Vec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  dynq::Box box(std::size_t n, double lo, double hi, double min_width) {
    dynq::Vec a(n), b(n);
    for (std::size_t l = 0; l < n; ++l) {
      a[l] = uniform(lo, hi - min_width);
      b[l] = uniform(a[l] + min_width, hi);
    }
    return dynq::Box(a, b);
  }

 private:
  std::mt19937_64 rng_;
};

// The bicycle patrol configuration.
inline dynq::ZoomQuantizer bike_quantizer() { return dynq::ZoomQuantizer(64, {0.2, 0.2, 2 * kPi / 35}); }

inline dynq::Box s0_box() { return dynq::Box({0, 0, -4 * kPi / 35}, {0.6, 0.6, 4 * kPi / 35}); }

inline dynq::Box bike_workspace() { return dynq::Box({0, 0, -kPi}, {10, 10, kPi}); }

inline dynq::RegionPolicy bike_policy() {
  dynq::RegionPolicy p;
  p.omega = 0.1;
  p.omega_in = 1.0;
  p.omega_out = 1.0;
  p.base_halfwidths = {0.3, 0.3, 4 * kPi / 35};
  p.mu0 = 1.0;
  p.eta0 = 0.2;
  return p;
}

inline dynq::PrecisionBudget bike_budget() { return {0.2, dynq::exponential_bound(1.0, 5.0), 0.3}; }

inline dynq::Region s0_region() { return dynq::initial_region(s0_box(), bike_policy()); }

inline dynq::Scenario bike_scenario(std::vector<dynq::Box> obstacles = {}) {
  dynq::Scenario s;
  s.state_box = bike_workspace();
  s.initial_state = {0.4, 0.4, 0.0};
  s.obstacles = std::move(obstacles);
  s.targets = {dynq::Box({0, 0}, {0.5, 0.5}), dynq::Box({9, 0}, {9.5, 0.5})};
  s.budget = bike_budget();
  s.policy = bike_policy();
  s.initial_region = s0_box();
  return s;
}

// Scalar xdot = -x + u with the parameters of the exhaustive bisimulation instance.
inline dynq::ZoomQuantizer scalar_quantizer() { return dynq::ZoomQuantizer(64, {1.0}); }
inline dynq::PrecisionBudget scalar_budget() { return {0.2, dynq::exponential_bound(1.0, 1.0), 0.3}; }
inline dynq::Region scalar_region() {
  dynq::Region r;
  r.id = 0;
  r.box = dynq::Box({-1.0}, {1.0});
  r.mu = 0.05;
  r.eta = 0.02;
  r.omega = 0.1;
  return r;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

#ifdef DYNQ_SCENARIO_DIR
inline std::string scenario_path(const std::string& name) {
  return std::string(DYNQ_SCENARIO_DIR) + "/" + name + ".json";
}
#endif

}  // namespace fx
