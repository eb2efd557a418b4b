#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "dynq/cli.hpp"
#include "dynq/errors.hpp"
#include "fixtures.hpp"

using namespace dynq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dynq_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

cli::RunConfig config(const std::string& sub, const std::string& scenario, const fs::path& out) {
  cli::RunConfig c;
  c.subcommand = sub;
  c.scenario_path = fx::scenario_path(scenario);
  c.out_dir = out.string();
  return c;
}

int run_args(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "dynq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

}  // namespace

TEST(ResolveSetup, DefaultsAreTheBicyclePatrol) {
  const cli::Setup s = cli::resolve_setup("", {});
  EXPECT_EQ(s.model, "bicycle");
  EXPECT_DOUBLE_EQ(s.tau, 0.3);
  EXPECT_DOUBLE_EQ(s.scenario.budget.epsilon, 0.2);
  EXPECT_EQ(s.qz.M, 64);
  EXPECT_EQ(s.scenario.initial_region, fx::s0_box());
  EXPECT_EQ(s.heading_axis, 2);
  EXPECT_TRUE(s.scenario.obstacles.empty());
  EXPECT_EQ(lattice_points(s.scenario.initial_region, 0, s.qz).size(), 80u);
}

// Default < scenario file < command-line override, key by key.
TEST(ResolveSetup, PrecedenceMatrix) {
  const std::string file = R"({"tau": 0.25, "epsilon": 0.3, "mu0": 0.9, "eta0": 0.15, "omega": 0.05,
    "omega_in": 0.9, "omega_out": 1.1, "M": 80, "seed": 3, "integrator_steps": 4, "grid_pitch": 0.1,
    "lambda": [0.1, 0.1, 0.1]})";
  cli::Overrides o;
  o.tau = 0.2;
  o.epsilon = 0.25;
  o.mu0 = 0.8;
  o.eta0 = 0.1;
  o.omega = 0.04;
  o.omega_in = 0.7;
  o.omega_out = 1.2;
  o.M = 90;
  o.seed = 9;
  o.integrator_steps = 12;
  o.grid_pitch = 0.2;
  o.lambda = Vec{0.15, 0.15, 0.15};

  const cli::Setup d = cli::resolve_setup("{}", {});
  const cli::Setup f = cli::resolve_setup(file, {});
  const cli::Setup c = cli::resolve_setup(file, o);

  auto row = [](const cli::Setup& s) {
    const Scenario& n = s.scenario;
    return std::vector<double>{s.tau, n.budget.epsilon, n.policy.mu0, n.policy.eta0, n.policy.omega,
                               n.policy.omega_in, n.policy.omega_out, double(s.qz.M), double(n.seed),
                               double(s.integrator_steps), s.grid_pitch, s.qz.lambda[0]};
  };
  EXPECT_EQ(row(d), (std::vector<double>{0.3, 0.2, 1.0, 0.2, 0.1, 1.0, 1.0, 64, 0, 16, 0.05, 0.2}));
  EXPECT_EQ(row(f), (std::vector<double>{0.25, 0.3, 0.9, 0.15, 0.05, 0.9, 1.1, 80, 3, 4, 0.1, 0.1}));
  EXPECT_EQ(row(c), (std::vector<double>{0.2, 0.25, 0.8, 0.1, 0.04, 0.7, 1.2, 90, 9, 12, 0.2, 0.15}));
  EXPECT_DOUBLE_EQ(c.scenario.budget.tau, 0.2);
  EXPECT_DOUBLE_EQ(c.system().tau(), 0.2);
  EXPECT_EQ(c.system().integrator_steps(), 12);
}

TEST(ResolveSetup, ParseErrors) {
  EXPECT_THROW(cli::resolve_setup("{not json", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup("[1, 2]", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"tau": "fast"})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"tau": -1})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"lambda": [0.2, 0.2]})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"model": "unicycle"})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"model": "scalar_linear"})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"targets": [{"lo": [0, 0], "hi": [1, 1]}]})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"initial_state": [20, 0, 0]})", {}), ParseError);
  EXPECT_THROW(cli::resolve_setup(R"({"state_box": {"lo": [0, 0, 0]}})", {}), ParseError);
  cli::Overrides bad;
  bad.omega_in = 1.5;
  EXPECT_THROW(cli::resolve_setup("{}", bad), ParseError);
}

TEST(ResolveSetup, ScalarScenarioFile) {
  const cli::Setup s = cli::resolve_setup(fx::read_file(fx::scenario_path("scalar_linear")), {});
  EXPECT_EQ(s.model, "scalar_linear");
  EXPECT_EQ(s.heading_axis, -1);
  EXPECT_DOUBLE_EQ(s.scenario.policy.mu0, 0.05);
  EXPECT_DOUBLE_EQ(s.scenario.policy.base_halfwidths[0], 20.0);
}

TEST(Commands, AbstractWritesEightyStates) {
  const fs::path out = scratch("abstract");
  std::ostringstream os;
  EXPECT_EQ(cli::cmd_abstract(config("abstract", "patrol_bicycle", out), os), cli::exit_ok);
  EXPECT_NE(os.str().find("\nstates 80\n"), std::string::npos) << os.str();
  EXPECT_TRUE(fs::exists(out / "abstraction.txt"));
  EXPECT_TRUE(fs::exists(out / "report.txt"));
}

TEST(Commands, CheckScalarHoldsAndTamperedFileFails) {
  const fs::path out = scratch("check");
  std::ostringstream os;
  EXPECT_EQ(cli::cmd_check(config("check", "scalar_linear", out), os), cli::exit_ok);
  EXPECT_NE(fx::read_file((out / "verdict.txt").string()).find("holds"), std::string::npos);

  ASSERT_EQ(cli::cmd_abstract(config("abstract", "scalar_linear", out), os), cli::exit_ok);
  auto c = config("check", "scalar_linear", out);
  c.abstraction_path = (out / "abstraction.txt").string();
  EXPECT_EQ(cli::cmd_check(c, os), cli::exit_ok);

  // Redirect every transition to the state at k = 20.
  std::string text = fx::read_file(c.abstraction_path);
  const auto at = text.find("\ntransitions ");
  ASSERT_NE(at, std::string::npos);
  const std::string head = text.substr(0, at + 1);
  std::istringstream body(text.substr(at + 1));
  std::ostringstream tampered;
  tampered << head;
  std::string line;
  std::getline(body, line);
  tampered << line << '\n';
  while (std::getline(body, line)) {
    const auto colon = line.rfind(':');
    tampered << line.substr(0, colon + 1) << "20\n";
  }
  const fs::path bad = out / "tampered.txt";
  std::ofstream(bad) << tampered.str();
  c.abstraction_path = bad.string();
  EXPECT_EQ(cli::dispatch(c, os, os), cli::exit_relation);
}

TEST(Commands, PlanAndSimulateScalar) {
  const fs::path out = scratch("plan");
  std::ostringstream os;
  EXPECT_EQ(cli::cmd_plan(config("plan", "scalar_linear", out), os), cli::exit_ok);
  for (const char* f : {"plan.txt", "trajectory.csv", "plan.svg"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  auto c = config("simulate", "scalar_linear", out);
  c.cycles = 2;
  std::ostringstream sim;
  EXPECT_EQ(cli::cmd_simulate(c, sim), cli::exit_ok);
  EXPECT_NE(sim.str().find("obstacle_hits 0"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "patrol.csv"));
}

TEST(Dispatch, ExitCodes) {
  const fs::path out = scratch("dispatch");
  std::ostringstream os, err;
  auto c = config("plan", "blocked_corridor", out);
  EXPECT_EQ(cli::dispatch(c, os, err), cli::exit_no_path);
  c = config("abstract", "patrol_bicycle", out);
  c.overrides.epsilon = 0.05;
  EXPECT_EQ(cli::dispatch(c, os, err), cli::exit_precision);
  c = config("abstract", "patrol_bicycle", out);
  c.scenario_path = (out / "missing.json").string();
  EXPECT_EQ(cli::dispatch(c, os, err), cli::exit_parse);
  c.subcommand = "dance";
  EXPECT_EQ(cli::dispatch(c, os, err), cli::exit_parse);
}

TEST(Run, CommandLineParsing) {
  const fs::path out = scratch("run");
  std::string text;
  EXPECT_EQ(run_args({"abstract", fx::scenario_path("patrol_bicycle"), "-o", out.string()}, &text), 0);
  EXPECT_NE(text.find("\nstates 80\n"), std::string::npos);
  EXPECT_EQ(run_args({"abstract", fx::scenario_path("patrol_bicycle"), "-o", out.string(), "--epsilon", "0.05"}),
            cli::exit_precision);
  EXPECT_EQ(run_args({"abstract", "--tau", "abc"}), cli::exit_parse);
  EXPECT_EQ(run_args({"simulate", "--cycles", "0"}), cli::exit_parse);
  EXPECT_EQ(run_args({}), cli::exit_parse);
  EXPECT_EQ(run_args({"--help"}), cli::exit_ok);
  EXPECT_EQ(run_args({"check", fx::scenario_path("scalar_linear"), "-o", out.string(), "--grid-pitch", "0.02"}, &text),
            cli::exit_ok);
  EXPECT_NE(text.find("concrete_states 101"), std::string::npos) << text;
}
