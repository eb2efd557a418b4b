#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynq/types.hpp"

namespace dynq {

/// f(x, u) written into dx; must be deterministic and free of side effects.
using VectorField =
    std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> dx)>;

/// Input map under which the flow over one sample runs backwards exactly,
/// i.e. f(x, reverse(u)) = -f(x, u) for all x.
using ReverseInput = std::function<Vec(std::span<const double> u)>;

/// Continuous control system xdot = f(x, u), u in a box.
struct ControlSystem {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  VectorField vector_field;
  double lipschitz = 0.0;
  Box input_box;
  /// Optional; enables exact reversal of open-loop segments.
  ReverseInput reverse_input;

  Vec eval(std::span<const double> x, std::span<const double> u) const;
};

/// Time discretisation of a ControlSystem with period tau.
class SampledSystem {
 public:
  SampledSystem(ControlSystem system, double tau, int integrator_steps = 16);

  const ControlSystem& system() const { return system_; }
  double tau() const { return tau_; }
  int integrator_steps() const { return steps_; }
  std::size_t state_dim() const { return system_.state_dim; }
  std::size_t input_dim() const { return system_.input_dim; }

 private:
  ControlSystem system_;
  double tau_;
  int steps_;
};

/// Fixed-step classical RK4 over one sampling period with constant input.
/// Throws InputOutOfRangeError if u is outside the input box and
/// NonFiniteError if any stage produces NaN or infinity.
Vec integrate(const SampledSystem& sys, std::span<const double> x, std::span<const double> u);

/// Same as integrate() but over an arbitrary horizon `duration` split into
/// `steps` sub-steps (used for reference solutions and order checks).
Vec integrate_for(const ControlSystem& sys, std::span<const double> x, std::span<const double> u,
                  double duration, int steps);

using ScalarFunction = std::function<double(double)>;

/// Candidate incremental Lyapunov function V(x1, x2) with comparison functions.
struct LyapunovCertificate {
  std::function<double(std::span<const double>, std::span<const double>)> V;
  std::function<std::pair<Vec, Vec>(std::span<const double>, std::span<const double>)> grad_V;
  ScalarFunction alpha1;
  ScalarFunction alpha2;
  ScalarFunction rho;
};

/// beta(r, t) bounding the distance of two trajectories under the same input.
struct StabilityBound {
  std::function<double(double r, double t)> beta;
  std::map<std::string, double> params;

  double operator()(double r, double t) const { return beta(r, t); }
};

/// beta(r, t) = gain * r * exp(-rate * t).
StabilityBound exponential_bound(double gain, double rate);

struct LyapunovViolation {
  Vec x1;
  Vec x2;
  Vec u;
  enum class Kind { lower_sandwich, upper_sandwich, decrease } kind;
  double residual;  // positive means the inequality is violated
};

struct LyapunovReport {
  std::vector<LyapunovViolation> violations;
  double max_residual = 0.0;
  std::size_t samples = 0;
};

/// Samples (x1, x2, u) from a scrambled Halton sequence over box^2 x U and
/// checks both the sandwich bounds and the decrease condition.
LyapunovReport check_lyapunov(const LyapunovCertificate& cert, const ControlSystem& sys,
                              const Box& sample_box, std::size_t n_samples, std::uint64_t seed);

/// beta(r,t) = alpha1^{-1}(alpha2(r) e^{-kappa t}) for rho(s) = kappa s.
/// Throws UnsupportedRhoError if rho is not linear.
StabilityBound beta_from_lyapunov(const LyapunovCertificate& cert);

/// Largest ratio |f(x,u)-f(y,u)| / |x-y| over seeded samples; a spot check of
/// the user-supplied Lipschitz constant, not a bound.
double estimate_lipschitz(const ControlSystem& sys, const Box& sample_box, std::size_t n_samples,
                          std::uint64_t seed);

/// Built-in models: "bicycle", "scalar_linear", "double_integrator".
ControlSystem make_model(const std::string& name);
std::vector<std::string> model_names();

}  // namespace dynq
