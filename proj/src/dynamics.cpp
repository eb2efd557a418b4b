#include "dynq/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "dynq/errors.hpp"

namespace dynq {

Vec ControlSystem::eval(std::span<const double> x, std::span<const double> u) const {
  Vec dx(state_dim);
  vector_field(x, u, dx);
  return dx;
}

SampledSystem::SampledSystem(ControlSystem system, double tau, int integrator_steps)
    : system_(std::move(system)), tau_(tau), steps_(integrator_steps) {
  if (!(tau_ > 0.0)) throw PreconditionError("sampling period must be positive");
  if (steps_ < 1) throw PreconditionError("integrator_steps must be at least 1");
  if (!system_.vector_field) throw PreconditionError("control system has no vector field");
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double c : v)
    if (!std::isfinite(c)) throw NonFiniteError(std::string("non-finite value in ") + what);
}

}  // namespace

Vec integrate_for(const ControlSystem& sys, std::span<const double> x, std::span<const double> u,
                  double duration, int steps) {
  const std::size_t n = sys.state_dim;
  if (x.size() != n || u.size() != sys.input_dim)
    throw PreconditionError("integrate: dimension mismatch");
  require_finite(x, "initial state");
  const double h = duration / steps;
  Vec state(x.begin(), x.end());
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int s = 0; s < steps; ++s) {
    sys.vector_field(state, u, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
    sys.vector_field(tmp, u, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
    sys.vector_field(tmp, u, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
    sys.vector_field(tmp, u, k4);
    for (std::size_t i = 0; i < n; ++i)
      state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    require_finite(state, "integrator stage");
  }
  return state;
}

Vec integrate(const SampledSystem& sys, std::span<const double> x, std::span<const double> u) {
  if (!sys.system().input_box.contains(u, 1e-12))
    throw InputOutOfRangeError("input " + to_string(u) + " outside " +
                               to_string(sys.system().input_box));
  return integrate_for(sys.system(), x, u, sys.tau(), sys.integrator_steps());
}

StabilityBound exponential_bound(double gain, double rate) {
  StabilityBound b;
  b.beta = [gain, rate](double r, double t) { return gain * r * std::exp(-rate * t); };
  b.params = {{"gain", gain}, {"rate", rate}};
  return b;
}

namespace {

// Radical inverse in base `b`, used for the Halton sequence.
double radical_inverse(std::uint64_t i, unsigned b) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= b;
    r += f * static_cast<double>(i % b);
    i /= b;
  }
  return r;
}

constexpr std::array<unsigned, 24> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

// Halton points shifted modulo 1 by a seeded random vector (Cranley-Patterson).
class ShiftedHalton {
 public:
  ShiftedHalton(std::size_t dim, std::uint64_t seed) : shift_(dim) {
    if (dim > kPrimes.size()) throw PreconditionError("sampling dimension too large");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double& s : shift_) s = unif(rng);
  }

  Vec next() {
    ++index_;
    Vec p(shift_.size());
    for (std::size_t d = 0; d < p.size(); ++d) {
      double v = radical_inverse(index_, kPrimes[d]) + shift_[d];
      p[d] = v - std::floor(v);
    }
    return p;
  }

 private:
  Vec shift_;
  std::uint64_t index_ = 0;
};

Vec scale_into(const Box& box, std::span<const double> unit, std::size_t offset) {
  Vec x(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i)
    x[i] = box.lo[i] + unit[offset + i] * (box.hi[i] - box.lo[i]);
  return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LyapunovReport check_lyapunov(const LyapunovCertificate& cert, const ControlSystem& sys,
                              const Box& sample_box, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw PreconditionError("check_lyapunov needs at least one sample");
  constexpr double kTol = 1e-9;
  const std::size_t n = sys.state_dim, m = sys.input_dim;
  ShiftedHalton seq(2 * n + m, seed);
  LyapunovReport report;
  report.max_residual = -std::numeric_limits<double>::infinity();
  report.samples = n_samples;

  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec p = seq.next();
    const Vec x1 = scale_into(sample_box, p, 0);
    const Vec x2 = scale_into(sample_box, p, n);
    const Vec u = scale_into(sys.input_box, p, 2 * n);

    const double v = cert.V(x1, x2);
    const double d = inf_dist(x1, x2);
    const auto [g1, g2] = cert.grad_V(x1, x2);
    const double vdot = dot(g1, sys.eval(x1, u)) + dot(g2, sys.eval(x2, u));

    const std::array<std::pair<LyapunovViolation::Kind, double>, 3> residuals{{
        {LyapunovViolation::Kind::lower_sandwich, cert.alpha1(d) - v},
        {LyapunovViolation::Kind::upper_sandwich, v - cert.alpha2(d)},
        {LyapunovViolation::Kind::decrease, vdot + cert.rho(v)},
    }};
    for (const auto& [kind, r] : residuals) {
      report.max_residual = std::max(report.max_residual, r);
      if (r > kTol) report.violations.push_back({x1, x2, u, kind, r});
    }
  }
  return report;
}

namespace {

// Inverse of a strictly increasing function with f(0) = 0 by bisection.
double invert_increasing(const ScalarFunction& f, double y) {
  if (y <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (f(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw PreconditionError("alpha1 does not reach the requested value");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

StabilityBound beta_from_lyapunov(const LyapunovCertificate& cert) {
  // rho is accepted only if rho(s)/s is constant on a logarithmic probe set.
  const std::array<double, 7> probes{1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0, 10.0};
  const double kappa = cert.rho(1.0);
  if (!(kappa > 0.0) || cert.rho(0.0) != 0.0)
    throw UnsupportedRhoError("rho must be of the form kappa*s with kappa > 0");
  for (double s : probes) {
    const double ratio = cert.rho(s) / s;
    if (std::abs(ratio - kappa) > 1e-9 * std::max(1.0, kappa))
      throw UnsupportedRhoError("rho is not linear; only rho(s) = kappa*s is supported");
  }
  StabilityBound b;
  auto alpha1 = cert.alpha1;
  auto alpha2 = cert.alpha2;
  b.beta = [alpha1, alpha2, kappa](double r, double t) {
    if (r <= 0.0) return 0.0;
    return invert_increasing(alpha1, alpha2(r) * std::exp(-kappa * t));
  };
  b.params = {{"rate", kappa}};
  return b;
}

double estimate_lipschitz(const ControlSystem& sys, const Box& sample_box, std::size_t n_samples,
                          std::uint64_t seed) {
  const std::size_t n = sys.state_dim, m = sys.input_dim;
  ShiftedHalton seq(2 * n + m, seed);
  double worst = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec p = seq.next();
    const Vec x = scale_into(sample_box, p, 0);
    const Vec y = scale_into(sample_box, p, n);
    const Vec u = scale_into(sys.input_box, p, 2 * n);
    const double d = inf_dist(x, y);
    if (d <= 0.0) continue;
    worst = std::max(worst, inf_dist(sys.eval(x, u), sys.eval(y, u)) / d);
  }
  return worst;
}

}  // namespace dynq
