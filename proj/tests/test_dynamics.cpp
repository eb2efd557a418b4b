#include <gtest/gtest.h>

#include <cmath>

#include "dynq/dynamics.hpp"
#include "dynq/errors.hpp"
#include "fixtures.hpp"

using namespace dynq;

namespace {

// Exact flow of xdot = -x + u with constant u.
double scalar_flow(double x, double u, double t) { return x * std::exp(-t) + u * (1.0 - std::exp(-t)); }

LyapunovCertificate quadratic_certificate(double kappa) {
  LyapunovCertificate c;
  c.V = [](std::span<const double> a, std::span<const double> b) { return (a[0] - b[0]) * (a[0] - b[0]); };
  c.grad_V = [](std::span<const double> a, std::span<const double> b) {
    const double g = 2.0 * (a[0] - b[0]);
    return std::pair<Vec, Vec>{{g}, {-g}};
  };
  c.alpha1 = [](double s) { return s * s; };
  c.alpha2 = [](double s) { return s * s; };
  c.rho = [kappa](double s) { return kappa * s; };
  return c;
}

ControlSystem unstable_scalar() {
  ControlSystem s;
  s.name = "unstable";
  s.state_dim = 1;
  s.input_dim = 1;
  s.vector_field = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
    dx[0] = x[0];
  };
  s.lipschitz = 1.0;
  s.input_box = Box({-1.0}, {1.0});
  return s;
}

}  // namespace

TEST(Integrate, BicycleZeroSpeedIsFixedPoint) {
  SampledSystem sys(make_model("bicycle"), 0.3);
  const Vec x = integrate(sys, Vec{0, 0, 0}, Vec{0, 0.5});
  EXPECT_EQ(x, (Vec{0, 0, 0}));
}

TEST(Integrate, BicycleStraightLine) {
  SampledSystem sys(make_model("bicycle"), 0.3);
  const Vec x = integrate(sys, Vec{0, 0, 0}, Vec{1, 0});
  EXPECT_NEAR(x[0], 0.3, 1e-12);
  EXPECT_NEAR(x[1], 0.0, 1e-12);
  EXPECT_NEAR(x[2], 0.0, 1e-12);
}

TEST(Integrate, ScalarMatchesExactSolution) {
  SampledSystem sys(make_model("scalar_linear"), 0.3);
  EXPECT_NEAR(integrate(sys, Vec{1.0}, Vec{0.0})[0], std::exp(-0.3), 1e-8);
  fx::Gen g(11);
  for (int i = 0; i < 200; ++i) {
    const double x = g.uniform(-3, 3), u = g.uniform(-1, 1);
    EXPECT_NEAR(integrate(sys, Vec{x}, Vec{u})[0], scalar_flow(x, u, 0.3), 1e-8);
  }
}

TEST(Integrate, InputOutsideBoxRejected) {
  SampledSystem sys(make_model("bicycle"), 0.3);
  EXPECT_THROW(integrate(sys, Vec{0, 0, 0}, Vec{1.5, 0}), InputOutOfRangeError);
  EXPECT_THROW(integrate(sys, Vec{0, 0, 0}, Vec{0, -1.01}), InputOutOfRangeError);
}

TEST(Integrate, BlowUpReportedAsNonFinite) {
  ControlSystem s;
  s.state_dim = 1;
  s.input_dim = 1;
  s.vector_field = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
    dx[0] = x[0] * x[0];
  };
  s.input_box = Box({0.0}, {0.0});
  SampledSystem sys(s, 1.0, 4);
  EXPECT_THROW(integrate(sys, Vec{1e200}, Vec{0.0}), NonFiniteError);
  EXPECT_THROW(integrate(sys, Vec{std::nan("")}, Vec{0.0}), NonFiniteError);
}

TEST(Integrate, InvalidSamplingRejected) {
  EXPECT_THROW(SampledSystem(make_model("bicycle"), 0.0), PreconditionError);
  EXPECT_THROW(SampledSystem(make_model("bicycle"), 0.3, 0), PreconditionError);
}

TEST(Integrate, Rk4ConvergenceOrderOnBicycle) {
  const ControlSystem bike = make_model("bicycle");
  const Vec x0{0.3, -0.2, 0.5}, u{0.9, 0.7};
  const double T = 3.0;
  const Vec ref = integrate_for(bike, x0, u, T, 10000);
  const double e1 = inf_dist(integrate_for(bike, x0, u, T, 10), ref);
  const double e2 = inf_dist(integrate_for(bike, x0, u, T, 20), ref);
  EXPECT_GT(e1, 0.0);
  EXPECT_GE(e1 / e2, 12.0);
}

TEST(Integrate, SemigroupOnBicycle) {
  SampledSystem sys(make_model("bicycle"), 0.3);
  fx::Gen g(5);
  for (int i = 0; i < 50; ++i) {
    const Vec x = g.vec(3, -1, 1), u = g.vec(2, -1, 1);
    const Vec twice = integrate(sys, integrate(sys, x, u), u);
    const Vec once = integrate_for(sys.system(), x, u, 0.6, 16);
    EXPECT_LE(inf_dist(twice, once), 1e-7);
  }
}

TEST(Integrate, BicycleReverseInputRetracesSample) {
  SampledSystem sys(make_model("bicycle"), 0.3);
  const auto& rev = sys.system().reverse_input;
  ASSERT_TRUE(rev);
  fx::Gen g(9);
  for (int i = 0; i < 50; ++i) {
    const Vec x = g.vec(3, -2, 2), u = g.vec(2, -1, 1);
    EXPECT_LE(inf_dist(integrate(sys, integrate(sys, x, u), rev(u)), x), 1e-9);
  }
}

TEST(Integrate, DeterministicVectorField) {
  const ControlSystem bike = make_model("bicycle");
  fx::Gen g(3);
  for (int i = 0; i < 20; ++i) {
    const Vec x = g.vec(3, -3, 3), u = g.vec(2, -1, 1);
    EXPECT_EQ(bike.eval(x, u), bike.eval(x, u));
  }
}

TEST(Lipschitz, SampledRatioBelowDeclaredConstant) {
  for (const auto& name : model_names()) {
    const ControlSystem s = make_model(name);
    Box sample(Vec(s.state_dim, -2.0), Vec(s.state_dim, 2.0));
    EXPECT_LE(estimate_lipschitz(s, sample, 2000, 17), s.lipschitz + 1e-9) << name;
  }
}

TEST(Models, RegistryAndUnknownName) {
  const auto names = model_names();
  EXPECT_EQ(names.size(), 3u);
  EXPECT_THROW(make_model("unicycle"), PreconditionError);
  const ControlSystem di = make_model("double_integrator");
  EXPECT_EQ(di.eval(Vec{1.0, 2.0}, Vec{0.5}), (Vec{2.0, 0.5}));
}

TEST(CheckLyapunov, StableScalarHasNoViolations) {
  const LyapunovReport r =
      check_lyapunov(quadratic_certificate(2.0), make_model("scalar_linear"), Box({-5.0}, {5.0}), 2000, 1);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.samples, 2000u);
  EXPECT_LE(r.max_residual, 1e-9);
}

TEST(CheckLyapunov, UnstableScalarViolatesEverywhereOffDiagonal) {
  const LyapunovReport r =
      check_lyapunov(quadratic_certificate(2.0), unstable_scalar(), Box({-1.0}, {1.0}), 500, 2);
  std::size_t decrease = 0;
  for (const auto& v : r.violations)
    if (v.kind == LyapunovViolation::Kind::decrease) ++decrease;
  EXPECT_EQ(decrease, 500u);
  EXPECT_GT(r.max_residual, 0.0);
}

TEST(CheckLyapunov, DiagonalSamplesNeverViolate) {
  const LyapunovReport r =
      check_lyapunov(quadratic_certificate(2.0), unstable_scalar(), Box({0.3}, {0.3}), 100, 3);
  EXPECT_TRUE(r.violations.empty());
}

TEST(CheckLyapunov, SeedDeterminesSamples) {
  const auto a = check_lyapunov(quadratic_certificate(2.0), unstable_scalar(), Box({-1.0}, {1.0}), 50, 7);
  const auto b = check_lyapunov(quadratic_certificate(2.0), unstable_scalar(), Box({-1.0}, {1.0}), 50, 7);
  ASSERT_EQ(a.violations.size(), b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) EXPECT_EQ(a.violations[i].x1, b.violations[i].x1);
}

TEST(BetaFromLyapunov, QuadraticGivesUnitExponential) {
  const StabilityBound beta = beta_from_lyapunov(quadratic_certificate(2.0));
  for (double r : {0.0, 0.1, 0.5, 2.0})
    for (double t : {0.0, 0.3, 1.0, 4.0}) EXPECT_NEAR(beta(r, t), r * std::exp(-t), 1e-8) << r << ' ' << t;
}

TEST(BetaFromLyapunov, LinearComparisonFunctions) {
  LyapunovCertificate c = quadratic_certificate(1.0);
  c.alpha1 = [](double s) { return s; };
  c.alpha2 = [](double s) { return 2.0 * s; };
  const StabilityBound beta = beta_from_lyapunov(c);
  for (double r : {0.0, 0.2, 1.0})
    for (double t : {0.0, 0.5, 2.0}) EXPECT_NEAR(beta(r, t), 2.0 * r * std::exp(-t), 1e-8);
}

TEST(BetaFromLyapunov, NonlinearRhoUnsupported) {
  LyapunovCertificate c = quadratic_certificate(1.0);
  c.rho = [](double s) { return s * s; };
  EXPECT_THROW(beta_from_lyapunov(c), UnsupportedRhoError);
}

TEST(StabilityBound, ExponentialIsClassKL) {
  const StabilityBound b = exponential_bound(1.5, 2.0);
  EXPECT_DOUBLE_EQ(b.params.at("gain"), 1.5);
  EXPECT_DOUBLE_EQ(b.params.at("rate"), 2.0);
  for (double t = 0; t < 5; t += 0.25) {
    EXPECT_EQ(b(0.0, t), 0.0);
    for (double r = 0; r < 2; r += 0.25) {
      EXPECT_LE(b(r, t + 0.25), b(r, t));
      EXPECT_LE(b(r, t), b(r + 0.25, t));
    }
  }
}

TEST(StabilityBound, ScalarTrajectoryPairsRespectBeta) {
  const StabilityBound beta = beta_from_lyapunov(quadratic_certificate(2.0));
  SampledSystem sys(make_model("scalar_linear"), 0.1);
  fx::Gen g(21);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x1{g.uniform(-3, 3)}, x2{g.uniform(-3, 3)};
    const double r = inf_dist(x1, x2);
    for (int k = 1; k <= 30; ++k) {
      const Vec u{g.uniform(-1, 1)};
      x1 = integrate(sys, x1, u);
      x2 = integrate(sys, x2, u);
      EXPECT_LE(inf_dist(x1, x2), beta(r, 0.1 * k) + 1e-9);
    }
  }
}
