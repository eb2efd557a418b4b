#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynq/abstraction.hpp"
#include "dynq/dynamics.hpp"
#include "dynq/quantization.hpp"
#include "dynq/region.hpp"
#include "dynq/regions.hpp"

namespace dynq {

/// Workspace, obstacles and the two patrol targets. Obstacles and targets
/// constrain only their leading axes (position); the rest is unconstrained.
struct Scenario {
  Box state_box;
  Vec initial_state;
  std::vector<Box> obstacles;
  std::vector<Box> targets;
  PrecisionBudget budget;
  RegionPolicy policy;
  /// S_0; the first region of every plan.
  Box initial_region;
  std::uint64_t seed = 0;

  /// Throws PreconditionError when an invariant fails.
  void validate() const;
};

enum class SearchMode {
  /// Breadth-first (unit step cost) inside a region, exits tried in order of
  /// the obstacle-aware distance to the target.
  uniform_cost,
  /// Exit order randomised with the scenario seed, except with probability
  /// goal_bias where the heuristic order is kept.
  goal_biased_tree,
};

struct PlannerOptions {
  SearchMode mode = SearchMode::uniform_cost;
  double goal_bias = 0.8;
  /// Weight of heading misalignment (radians) against distance in the exit order.
  double heading_weight = 0.3;
  /// Cap on generated regions, including abandoned ones.
  std::size_t max_regions = 3000;
  /// Exits explored per region before backtracking.
  std::size_t exits_per_region = 6;
  /// Cell size of the distance-to-target field on the position axes.
  double heuristic_resolution = 0.05;
  /// The concrete trajectory must stay within epsilon - tube_margin.
  double tube_margin = 0.01;
  /// Extra clearance between concrete samples and obstacles.
  double obstacle_clearance = 0.02;
  /// Number of leading state axes treated as position (obstacles, targets).
  std::size_t position_axes = 2;
  /// Heading axis used in the exit order, or -1 for none.
  int heading_axis = -1;
  /// Models without an exact input reversal close the patrol loop by
  /// returning this close to the initial state; each leg then has to end
  /// this far inside its target.
  double home_radius = 0.02;
};

/// Abstract path: states[j] --inputs[j]--> states[j+1].
struct Leg {
  std::vector<LatticePoint> states;
  std::vector<Vec> inputs;

  std::size_t steps() const { return inputs.size(); }
};

struct PlanStats {
  std::size_t regions_generated = 0;
  std::size_t regions_used = 0;
  std::size_t abstract_states = 0;
  std::size_t expanded = 0;
  std::size_t backtracks = 0;
};

struct PatrolPlan {
  Leg forward;  // from the first target to the second
  Leg back;     // from the second target to the first
  std::vector<Region> regions_used;
  PlanStats stats;
  double epsilon = 0.0;
  double tau = 0.0;
  Vec initial_state;
  Box state_box;
  std::vector<Box> obstacles;
  std::vector<Box> targets;
};

/// Dynamic abstraction interleaved with region generation and search for the
/// patrol between targets[0] and targets[1]. Deterministic given the
/// scenario (including its seed). Throws NoPathError or PrecisionBreachError.
PatrolPlan plan(const Scenario& scn, const SampledSystem& sys, const ZoomQuantizer& qz,
                const PlannerOptions& options = {});

/// Abstraction over the plan's regions (every region keeps its full lattice).
AbstractSystem plan_abstraction(const PatrolPlan& p, const SampledSystem& sys,
                                const ZoomQuantizer& qz, const PrecisionBudget& budget);

struct TrajectorySample {
  std::size_t step = 0;
  double t = 0.0;
  Vec x;
  /// Input applied from this sample on; empty at the final sample.
  Vec u;
  int region_id = 0;
  Vec abstract;
  double deviation = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double max_deviation = 0.0;
};

/// Open-loop replay of the leg's inputs from x0 with the epsilon-tube checked
/// at every sample. Throws RelationBreachError on exit from the tube.
Trajectory refine(const Leg& leg, const SampledSystem& sys, std::span<const double> x0,
                  double epsilon);
/// Forward leg followed by the back leg.
Trajectory refine(const PatrolPlan& p, const SampledSystem& sys, std::span<const double> x0);

struct VisitLog {
  /// Per target, the sample indices inside it.
  std::vector<std::vector<std::size_t>> inside;
  /// Per target, the number of separate visits (maximal runs of samples inside).
  std::vector<std::size_t> visits;
  /// Samples inside some obstacle box.
  std::vector<std::size_t> obstacle_hits;
};

struct PatrolRun {
  Trajectory trajectory;
  VisitLog log;
};

/// Forward and back legs repeated `cycles` times. cycles >= 1.
PatrolRun patrol_loop(const PatrolPlan& p, const SampledSystem& sys, std::span<const double> x0,
                      int cycles);

VisitLog visit_log(const Trajectory& tr, std::span<const Box> targets, std::span<const Box> obstacles);

/// Deterministic line-oriented serialisation.
void write_plan(std::ostream& os, const PatrolPlan& p);
/// CSV: step,t,x1..xn,u1..um,region_id,tube_deviation.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, std::size_t input_dim);
/// Projection to the first two axes: obstacles filled black, targets outlined,
/// region boxes faint, trajectory as a polyline.
void write_plan_svg(std::ostream& os, const PatrolPlan& p, const Trajectory& tr);

}  // namespace dynq
