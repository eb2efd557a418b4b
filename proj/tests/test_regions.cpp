#include <gtest/gtest.h>

#include <cmath>

#include "dynq/abstraction.hpp"
#include "dynq/errors.hpp"
#include "dynq/regions.hpp"
#include "fixtures.hpp"

using namespace dynq;

namespace {

Region unit_interval(double omega = 0.1) {
  Region r;
  r.box = Box({0.0}, {1.0});
  r.omega = omega;
  return r;
}

RegionPolicy scalar_policy(double in, double out) {
  RegionPolicy p;
  p.omega = 0.1;
  p.omega_in = in;
  p.omega_out = out;
  p.base_halfwidths = {0.5};
  return p;
}

}  // namespace

TEST(Contraction, Examples) {
  const Box c = contraction(unit_interval());
  EXPECT_DOUBLE_EQ(c.lo[0], 0.1);
  EXPECT_DOUBLE_EQ(c.hi[0], 0.9);
  EXPECT_THROW(contraction(unit_interval(0.5)), EmptyContractionError);

  const Box s0 = contraction(fx::s0_region());
  EXPECT_NEAR(s0.lo[0], 0.1, 1e-15);
  EXPECT_NEAR(s0.hi[1], 0.5, 1e-15);
  EXPECT_NEAR(s0.lo[2], -4 * fx::kPi / 35 + 0.1, 1e-15);
  EXPECT_NEAR(s0.hi[2], 4 * fx::kPi / 35 - 0.1, 1e-15);
}

TEST(Classify, Examples) {
  const Region r = unit_interval();
  EXPECT_EQ(classify(Vec{0.5}, r), Zone::inside_core);
  EXPECT_EQ(classify(Vec{0.95}, r), Zone::boundary_band);
  EXPECT_EQ(classify(Vec{1.5}, r), Zone::outside);
  EXPECT_EQ(classify(Vec{0.9}, r), Zone::inside_core);
  EXPECT_EQ(classify(Vec{1.0}, r), Zone::boundary_band);
  EXPECT_EQ(to_string(Zone::boundary_band), "boundary_band");
}

TEST(UpdateEvents, ClosedBoxOverlap) {
  Region r;
  r.box = Box({0.0, 0.0}, {1.0, 1.0});
  const std::vector<Box> far{Box({2.0, 2.0}, {3.0, 3.0})};
  const std::vector<Box> near{Box({0.5, 0.5}, {1.5, 1.5})};
  const std::vector<Box> touch{Box({1.0, 0.0}, {2.0, 1.0})};
  EXPECT_FALSE(update_events(r, far, {}).b);
  EXPECT_TRUE(update_events(r, near, {}).b);
  EXPECT_TRUE(update_events(r, touch, {}).b);
  const EventState e = update_events(r, far, near, true);
  EXPECT_TRUE(e.a);
  EXPECT_FALSE(e.b);
  EXPECT_TRUE(e.c);
}

TEST(NextRegion, MuUpdateLaws) {
  Region r = unit_interval();
  r.mu = 1.0;
  r.eta = 0.2;
  const Region in = next_region(Vec{0.95}, r, {true, true, false}, scalar_policy(0.8, 1.25));
  EXPECT_DOUBLE_EQ(in.mu, 0.8);
  EXPECT_DOUBLE_EQ(in.eta, 0.8 * 0.2);
  EXPECT_EQ(in.id, 1);
  const Region out = next_region(Vec{0.95}, r, {true, false, false}, scalar_policy(0.8, 1.25));
  EXPECT_DOUBLE_EQ(out.mu, 1.25);
  const Region same = next_region(Vec{0.95}, r, {true, false, true}, scalar_policy(1.0, 1.0));
  EXPECT_DOUBLE_EQ(same.mu, 1.0);
  EXPECT_DOUBLE_EQ(same.box.width(0), r.box.width(0));
}

TEST(NextRegion, CenteredAndOverlapping) {
  Region r = unit_interval();
  const Region n = next_region(Vec{0.95}, r, {}, scalar_policy(1.0, 1.0));
  EXPECT_NEAR(n.box.center()[0], 0.95, 1e-12);
  EXPECT_EQ(classify(Vec{0.95}, n), Zone::inside_core);
  EXPECT_TRUE(n.box.intersects(r.box));
}

TEST(NextRegion, SnapsToOwnLattice) {
  const RegionPolicy p = fx::bike_policy();
  const ZoomQuantizer qz = fx::bike_quantizer();
  const Region s0 = fx::s0_region();
  const Vec x{0.55, 0.3, 0.05};
  const Region n = next_region(x, s0, {}, p, &qz);
  EXPECT_EQ(classify(x, n), Zone::inside_core);
  EXPECT_EQ(lattice_points(n, qz).size(), 80u);
}

TEST(NextRegion, TriggerAndErrors) {
  const Region r = unit_interval();
  EXPECT_THROW(next_region(Vec{0.5}, r, {}, scalar_policy(1.0, 1.0)), PreconditionError);
  EXPECT_THROW(next_region(Vec{2.0}, r, {}, scalar_policy(1.0, 1.0)), PreconditionError);

  RegionPolicy tiny = scalar_policy(0.1, 1.0);
  tiny.base_halfwidths = {0.5};
  EXPECT_THROW(next_region(Vec{0.95}, r, {false, true, false}, tiny), DegenerateRegionError);

  Region z = r;
  z.mu = 0.05;
  z.eta = 0.02;
  const PrecisionBudget budget = fx::scalar_budget();
  const PrecisionGuard guard = [&](double mu, double eta) {
    const PrecisionCheck c = precision_ok(budget, 1.0, eta, mu);
    if (!c.ok) throw PrecisionBreachError("margin " + std::to_string(c.margin));
  };
  RegionPolicy grow = scalar_policy(1.0, 4.0);
  grow.base_halfwidths = {20.0};
  EXPECT_THROW(next_region(Vec{0.95}, z, {}, grow, nullptr, guard), PrecisionBreachError);
}

TEST(RegionPolicy, Validation) {
  EXPECT_NO_THROW(fx::bike_policy().validate());
  RegionPolicy p = fx::bike_policy();
  p.omega_in = 0.0;
  EXPECT_THROW(p.validate(), PreconditionError);
  p = fx::bike_policy();
  p.omega_out = 0.9;
  EXPECT_THROW(p.validate(), PreconditionError);
  p = fx::bike_policy();
  p.omega = 1.0;
  EXPECT_THROW(p.validate(), PreconditionError);
}

TEST(RegionProperties, GeometricMuLaw) {
  fx::Gen g(8);
  const RegionPolicy p = scalar_policy(0.9, 1.1);
  for (int trial = 0; trial < 20; ++trial) {
    Region r;
    r.box = Box({-0.5}, {0.5});
    r.mu = 1.0;
    r.eta = 0.1;
    int contractions = 0, steps = 0;
    for (; steps < 8; ++steps) {
      const bool obstacle = g.coin();
      contractions += obstacle;
      const double x = r.box.hi[0] - 0.5 * r.omega;
      r = next_region(Vec{x}, r, {true, obstacle, false}, p);
    }
    const double expected = std::pow(0.9, contractions) * std::pow(1.1, steps - contractions);
    EXPECT_NEAR(r.mu, expected, 1e-12);
    EXPECT_NEAR(r.eta, 0.1 * expected, 1e-12);
  }
}

TEST(RegionProperties, VolumeShrinksUnderPersistentObstacle) {
  RegionPolicy p;
  p.omega = 0.01;
  p.omega_in = 0.9;
  p.base_halfwidths = {1.0, 1.0};
  Region r;
  r.box = Box({-1.0, -1.0}, {1.0, 1.0});
  r.omega = 0.01;
  const double v0 = r.box.volume();
  for (int j = 1; j <= 5; ++j) {
    r = next_region(Vec{r.box.hi[0] - 0.005, r.box.center()[1]}, r, {true, true, false}, p);
    EXPECT_NEAR(r.box.volume(), v0 * std::pow(0.9, 2 * j), 1e-9);
  }
}

TEST(RegionProperties, RandomWalkTriggerSoundness) {
  // Random walk in the plane: a new region appears exactly when the walker
  // enters the boundary band, and the walker is always inside the current box.
  const RegionPolicy p = [] {
    RegionPolicy q;
    q.omega = 0.1;
    q.base_halfwidths = {0.5, 0.5};
    return q;
  }();
  fx::Gen g(77);
  Region r;
  r.box = Box({-0.5, -0.5}, {0.5, 0.5});
  Vec x{0.0, 0.0};
  int generated = 0, triggers = 0;
  for (int k = 0; k < 2000; ++k) {
    x[0] += g.uniform(-0.05, 0.05);
    x[1] += g.uniform(-0.05, 0.05);
    ASSERT_TRUE(r.box.contains(x));
    if (classify(x, r) == Zone::boundary_band) {
      ++triggers;
      const Region n = next_region(x, r, {true, false, false}, p);
      EXPECT_TRUE(n.box.intersects(r.box));
      r = n;
      ++generated;
    }
  }
  EXPECT_EQ(generated, triggers);
  EXPECT_EQ(r.id, generated);
  EXPECT_GT(generated, 0);
}

TEST(InitialRegion, FromPolicy) {
  const Region s0 = fx::s0_region();
  EXPECT_EQ(s0.id, 0);
  EXPECT_EQ(s0.box, fx::s0_box());
  EXPECT_DOUBLE_EQ(s0.mu, 1.0);
  EXPECT_DOUBLE_EQ(s0.eta, 0.2);
  RegionPolicy p = fx::bike_policy();
  p.omega = 0.5;
  EXPECT_THROW(initial_region(Box({0.0}, {0.6}), p), EmptyContractionError);
}
