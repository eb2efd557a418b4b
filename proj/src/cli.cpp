#include "dynq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "dynq/abstraction.hpp"
#include "dynq/bisim.hpp"
#include "dynq/errors.hpp"

namespace dynq::cli {

using nlohmann::json;

namespace {

const double kPi = std::acos(-1.0);

Box parse_box(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
    throw ParseError(std::string(what) + ": expected an object with \"lo\" and \"hi\"");
  Vec lo = j.at("lo").get<Vec>(), hi = j.at("hi").get<Vec>();
  if (lo.size() != hi.size() || lo.empty())
    throw ParseError(std::string(what) + ": \"lo\" and \"hi\" need the same nonzero length");
  for (std::size_t l = 0; l < lo.size(); ++l)
    if (!(lo[l] <= hi[l]) || !std::isfinite(lo[l]) || !std::isfinite(hi[l]))
      throw ParseError(std::string(what) + ": lo > hi or non-finite bound on axis " +
                       std::to_string(l));
  return Box(std::move(lo), std::move(hi));
}

std::vector<Box> parse_boxes(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array of boxes");
  std::vector<Box> out;
  for (const json& b : j) out.push_back(parse_box(b, what));
  return out;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParseError(msg);
}

template <class T>
T pick(const std::optional<T>& cli, const json& file, const char* key, T fallback) {
  if (cli) return *cli;
  if (file.contains(key)) return file.at(key).get<T>();
  return fallback;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  spdlog::debug("writing {}", path.string());
  return os;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Region first_region(const Setup& s) {
  return initial_region(s.scenario.initial_region, s.scenario.policy);
}

void write_report(std::ostream& os, const ComplexityReport& rep) {
  os << "regions " << rep.per_region.size() << '\n';
  os << "states " << rep.total_states << '\n';
  os << "uniform_baseline " << rep.uniform_baseline << '\n';
  os << "ratio " << rep.ratio() << '\n';
  for (const RegionComplexity& r : rep.per_region)
    os << "region " << r.region_id << " states " << r.states << " theta " << r.theta << '\n';
}

}  // namespace

SampledSystem Setup::system() const {
  ControlSystem cs = make_model(model);
  if (input_box) cs.input_box = *input_box;
  return SampledSystem(std::move(cs), tau, integrator_steps);
}

PlannerOptions Setup::planner_options() const {
  PlannerOptions o;
  o.heading_axis = heading_axis;
  return o;
}

Setup resolve_setup(std::string_view json_text, const Overrides& o) {
  json j;
  try {
    j = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");

  Setup s;
  try {
    s.model = j.value("model", std::string("bicycle"));
    const auto names = model_names();
    require(std::find(names.begin(), names.end(), s.model) != names.end(),
            "unknown model '" + s.model + "'");
    const ControlSystem cs = make_model(s.model);
    const std::size_t n = cs.state_dim;
    const bool bicycle = s.model == "bicycle";

    auto box_or = [&](const char* key, std::optional<Box> fallback) {
      if (j.contains(key)) return parse_box(j.at(key), key);
      require(fallback.has_value(), std::string("missing key '") + key + "'");
      return *fallback;
    };
    auto dims = [&](std::size_t got, const char* key) {
      require(got == n, std::string(key) + " has " + std::to_string(got) + " axes, model " +
                            s.model + " has " + std::to_string(n));
    };

    Scenario& scn = s.scenario;
    scn.state_box = box_or("state_box", bicycle ? std::optional(Box({0, 0, -kPi}, {10, 10, kPi}))
                                                : std::nullopt);
    dims(scn.state_box.dim(), "state_box");
    if (j.contains("initial_state")) {
      scn.initial_state = j.at("initial_state").get<Vec>();
    } else {
      require(bicycle, "missing key 'initial_state'");
      scn.initial_state = {0.4, 0.4, 0.0};
    }
    dims(scn.initial_state.size(), "initial_state");
    scn.obstacles = j.contains("obstacles") ? parse_boxes(j.at("obstacles"), "obstacles")
                                            : std::vector<Box>{};
    if (j.contains("targets")) {
      scn.targets = parse_boxes(j.at("targets"), "targets");
    } else {
      require(bicycle, "missing key 'targets'");
      scn.targets = {Box({0, 0}, {0.5, 0.5}), Box({9, 0}, {9.5, 0.5})};
    }
    require(scn.targets.size() == 2, "targets: exactly two boxes expected");
    scn.initial_region =
        box_or("initial_region", bicycle ? std::optional(Box({0, 0, -4 * kPi / 35},
                                                             {0.6, 0.6, 4 * kPi / 35}))
                                         : std::nullopt);
    dims(scn.initial_region.dim(), "initial_region");
    if (j.contains("input_box")) {
      s.input_box = parse_box(j.at("input_box"), "input_box");
      require(s.input_box->dim() == cs.input_dim, "input_box has the wrong dimension");
    }

    s.tau = pick(o.tau, j, "tau", 0.3);
    const double epsilon = pick(o.epsilon, j, "epsilon", 0.2);
    const double mu0 = pick(o.mu0, j, "mu0", 1.0);
    const double eta0 = pick(o.eta0, j, "eta0", 0.2);
    const double omega = pick(o.omega, j, "omega", 0.1);
    const double omega_in = pick(o.omega_in, j, "omega_in", 1.0);
    const double omega_out = pick(o.omega_out, j, "omega_out", 1.0);
    const int M = pick(o.M, j, "M", 64);
    Vec lambda_default = bicycle ? Vec{0.2, 0.2, 2 * kPi / 35} : Vec{};
    const Vec lambda = pick(o.lambda, j, "lambda", lambda_default);
    scn.seed = pick(o.seed, j, "seed", std::uint64_t{0});
    s.integrator_steps = pick(o.integrator_steps, j, "integrator_steps", 16);
    s.grid_pitch = pick(o.grid_pitch, j, "grid_pitch", 0.05);
    s.heading_axis = j.value("heading_axis", bicycle ? 2 : -1);
    double gain = 1.0, rate = 5.0;
    if (j.contains("beta")) {
      const json& b = j.at("beta");
      require(b.is_object(), "beta: expected {\"gain\": .., \"rate\": ..}");
      gain = b.value("gain", gain);
      rate = b.value("rate", rate);
    }

    require(s.tau > 0, "tau must be positive");
    require(epsilon > 0, "epsilon must be positive");
    require(mu0 > 0, "mu0 must be positive");
    require(eta0 > 0, "eta0 must be positive");
    require(omega > 0 && omega < 1, "omega must lie in (0, 1)");
    require(omega_in > 0 && omega_in <= 1, "omega_in must lie in (0, 1]");
    require(omega_out >= 1, "omega_out must be at least 1");
    require(M >= 1, "M must be at least 1");
    require(s.integrator_steps >= 1, "integrator_steps must be at least 1");
    require(s.grid_pitch > 0, "grid_pitch must be positive");
    require(gain > 0 && rate > 0, "beta gain and rate must be positive");
    dims(lambda.size(), "lambda");
    for (double l : lambda) require(l > 0, "lambda entries must be positive");

    try {
      s.qz = ZoomQuantizer(M, lambda);
    } catch (const Error& e) {
      throw ParseError(std::string("quantizer: ") + e.what());
    }
    scn.budget = PrecisionBudget{epsilon, exponential_bound(gain, rate), s.tau};
    scn.policy.omega = omega;
    scn.policy.omega_in = omega_in;
    scn.policy.omega_out = omega_out;
    scn.policy.mu0 = mu0;
    scn.policy.eta0 = eta0;
    scn.policy.base_halfwidths = scn.initial_region.halfwidths();
    for (double& h : scn.policy.base_halfwidths) h /= mu0;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }

  try {
    s.scenario.validate();
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return s;
}

Setup load_setup(const RunConfig& cfg) {
  const std::string text = cfg.scenario_path.empty() ? std::string() : read_text(cfg.scenario_path);
  return resolve_setup(text, cfg.overrides);
}

int cmd_abstract(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const SampledSystem sys = s.system();
  std::vector<Region> regions;
  if (cfg.with_plan) {
    regions = plan(s.scenario, sys, s.qz, s.planner_options()).regions_used;
  } else {
    regions.push_back(first_region(s));
  }
  BuildOptions opt;
  opt.dedup_overlaps = false;
  const AbstractSystem abs = build_abstraction(sys, regions, s.qz, s.scenario.budget, opt);
  const ComplexityReport rep = complexity_report(abs, s.scenario.state_box);
  {
    auto os = open_out(cfg.out_dir, "abstraction.txt");
    write_abstraction(os, abs);
  }
  {
    auto os = open_out(cfg.out_dir, "report.txt");
    write_report(os, rep);
  }
  out << "inputs " << abs.num_inputs() << '\n';
  out << "transitions " << abs.num_transitions() << '\n';
  write_report(out, rep);
  return exit_ok;
}

int cmd_plan(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const SampledSystem sys = s.system();
  const PatrolPlan p = plan(s.scenario, sys, s.qz, s.planner_options());
  const Trajectory tr = refine(p, sys, s.scenario.initial_state);
  {
    auto os = open_out(cfg.out_dir, "plan.txt");
    write_plan(os, p);
  }
  {
    auto os = open_out(cfg.out_dir, "trajectory.csv");
    write_trajectory_csv(os, tr, sys.input_dim());
  }
  {
    auto os = open_out(cfg.out_dir, "plan.svg");
    write_plan_svg(os, p, tr);
  }
  out << "regions_used " << p.stats.regions_used << '\n';
  out << "regions_generated " << p.stats.regions_generated << '\n';
  out << "abstract_states " << p.stats.abstract_states << '\n';
  out << "expanded " << p.stats.expanded << '\n';
  out << "backtracks " << p.stats.backtracks << '\n';
  out << "forward_steps " << p.forward.steps() << '\n';
  out << "back_steps " << p.back.steps() << '\n';
  out << "max_tube_deviation " << tr.max_deviation << '\n';
  return exit_ok;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const SampledSystem sys = s.system();
  HarnessReport rep;
  if (!cfg.abstraction_path.empty()) {
    std::istringstream is(read_text(cfg.abstraction_path));
    const AbstractSystem abs = read_abstraction(is);
    rep = theorem1_harness(sys, abs, s.scenario.budget, s.grid_pitch);
  } else {
    rep = theorem1_harness(sys, {first_region(s)}, s.qz, s.scenario.budget, s.grid_pitch);
  }
  {
    auto os = open_out(cfg.out_dir, "verdict.txt");
    write_harness_report(os, rep);
  }
  write_harness_report(out, rep);
  return rep.verdict.holds ? exit_ok : exit_relation;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Setup s = load_setup(cfg);
  const SampledSystem sys = s.system();
  const PatrolPlan p = plan(s.scenario, sys, s.qz, s.planner_options());
  const PatrolRun run = patrol_loop(p, sys, s.scenario.initial_state, cfg.cycles);
  {
    auto os = open_out(cfg.out_dir, "patrol.csv");
    write_trajectory_csv(os, run.trajectory, sys.input_dim());
  }
  out << "cycles " << cfg.cycles << '\n';
  out << "samples " << run.trajectory.samples.size() << '\n';
  for (std::size_t t = 0; t < run.log.visits.size(); ++t)
    out << "target " << t << " visits " << run.log.visits[t] << '\n';
  out << "obstacle_hits " << run.log.obstacle_hits.size() << '\n';
  out << "max_tube_deviation " << run.trajectory.max_deviation << '\n';
  bool ok = run.log.obstacle_hits.empty();
  for (std::size_t v : run.log.visits) ok = ok && v >= static_cast<std::size_t>(cfg.cycles);
  return ok ? exit_ok : exit_failure;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::map<std::string, std::function<int(const RunConfig&, std::ostream&)>> commands{
      {"abstract", cmd_abstract}, {"plan", cmd_plan}, {"check", cmd_check}, {"simulate", cmd_simulate}};
  auto it = commands.find(cfg.subcommand);
  if (it == commands.end()) {
    err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
    return exit_parse;
  }
  try {
    return it->second(cfg, out);
  } catch (const PrecisionBreachError& e) {
    err << "precision breach: " << e.what() << '\n';
    return exit_precision;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_parse;
  } catch (const NoPathError& e) {
    err << "no path: " << e.what() << '\n';
    return exit_no_path;
  } catch (const RelationBreachError& e) {
    err << "relation breach: " << e.what() << '\n';
    return exit_relation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  if (!spdlog::get("dynq")) {
    auto logger = spdlog::stderr_color_mt("dynq");
    logger->set_level(spdlog::level::warn);
    spdlog::set_default_logger(logger);
    spdlog::cfg::load_env_levels();
  }

  CLI::App app{"Dynamic symbolic abstraction and patrol planning"};
  app.require_subcommand(1);
  RunConfig cfg;
  double tau = 0, epsilon = 0, mu0 = 0, eta0 = 0, omega = 0, omega_in = 0, omega_out = 0,
         grid_pitch = 0;
  int M = 0, integrator_steps = 0;
  std::uint64_t seed = 0;
  Vec lambda;
  std::vector<std::pair<CLI::Option*, std::function<void()>>> bound;

  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", cfg.scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", cfg.out_dir, "Output directory");
    auto num = [&](const char* flag, auto& var, auto setter) {
      bound.emplace_back(sub->add_option(flag, var), setter);
    };
    num("--tau", tau, [&] { cfg.overrides.tau = tau; });
    num("--epsilon", epsilon, [&] { cfg.overrides.epsilon = epsilon; });
    num("--mu0", mu0, [&] { cfg.overrides.mu0 = mu0; });
    num("--eta0", eta0, [&] { cfg.overrides.eta0 = eta0; });
    num("--omega", omega, [&] { cfg.overrides.omega = omega; });
    num("--omega-in", omega_in, [&] { cfg.overrides.omega_in = omega_in; });
    num("--omega-out", omega_out, [&] { cfg.overrides.omega_out = omega_out; });
    num("--M", M, [&] { cfg.overrides.M = M; });
    num("--lambda", lambda, [&] { cfg.overrides.lambda = lambda; });
    num("--seed", seed, [&] { cfg.overrides.seed = seed; });
    num("--integrator-steps", integrator_steps,
        [&] { cfg.overrides.integrator_steps = integrator_steps; });
    num("--grid-pitch", grid_pitch, [&] { cfg.overrides.grid_pitch = grid_pitch; });
  };

  auto* abstract = app.add_subcommand("abstract", "Build the abstraction and its complexity report");
  common(abstract);
  abstract->add_flag("--with-plan", cfg.with_plan, "Abstract over the regions of a plan");
  auto* plan_cmd = app.add_subcommand("plan", "Plan the patrol; write plan, trajectory and SVG");
  common(plan_cmd);
  auto* check = app.add_subcommand("check", "Check the epsilon-bisimulation on a sampled grid");
  common(check);
  check->add_option("--abstraction", cfg.abstraction_path, "Abstraction file to verify")
      ->check(CLI::ExistingFile);
  auto* simulate = app.add_subcommand("simulate", "Replay the patrol loop");
  common(simulate);
  simulate->add_option("--cycles", cfg.cycles, "Patrol cycles")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? exit_ok : exit_parse;
  }
  for (auto& [opt, set] : bound)
    if (opt->count() > 0) set();
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return dispatch(cfg, out, err);
}

}  // namespace dynq::cli
