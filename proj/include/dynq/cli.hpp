#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "dynq/dynamics.hpp"
#include "dynq/planner.hpp"
#include "dynq/quantization.hpp"

namespace dynq::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_precision = 2,
  exit_parse = 3,
  exit_no_path = 4,
  exit_relation = 5,
};

/// Command-line values; each set field beats the scenario file.
struct Overrides {
  std::optional<double> tau;
  std::optional<double> epsilon;
  std::optional<double> mu0;
  std::optional<double> eta0;
  std::optional<double> omega;
  std::optional<double> omega_in;
  std::optional<double> omega_out;
  std::optional<int> M;
  std::optional<Vec> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<int> integrator_steps;
  std::optional<double> grid_pitch;
};

struct RunConfig {
  std::string subcommand;
  std::string scenario_path;
  std::string out_dir = ".";
  Overrides overrides;
  int cycles = 1;
  /// cmd_check: verify this abstraction file instead of building one.
  std::string abstraction_path;
  /// cmd_abstract: abstract over the regions of a plan instead of S_0 only.
  bool with_plan = false;
};

/// Everything a command needs, after applying defaults, file and overrides.
struct Setup {
  std::string model = "bicycle";
  std::optional<Box> input_box;
  Scenario scenario;
  ZoomQuantizer qz;
  double tau = 0.3;
  int integrator_steps = 16;
  double grid_pitch = 0.05;
  int heading_axis = -1;

  SampledSystem system() const;
  PlannerOptions planner_options() const;
};

/// Built-in defaults reproduce the bicycle patrol setup with an empty
/// obstacle set. Throws ParseError on malformed JSON or invalid values.
Setup resolve_setup(std::string_view json_text, const Overrides& overrides);
Setup load_setup(const RunConfig& cfg);

int cmd_abstract(const RunConfig& cfg, std::ostream& out);
int cmd_plan(const RunConfig& cfg, std::ostream& out);
int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);

/// Runs a command and maps library errors to exit codes, reporting them on err.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line: subcommands abstract, plan, check, simulate.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dynq::cli
