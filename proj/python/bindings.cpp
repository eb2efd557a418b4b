#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dynq/abstraction.hpp"
#include "dynq/bisim.hpp"
#include "dynq/cli.hpp"
#include "dynq/errors.hpp"
#include "dynq/planner.hpp"
#include "dynq/quantization.hpp"

namespace py = pybind11;
using namespace dynq;

namespace {

py::dict plan_dict(const PatrolPlan& p) {
  py::dict d;
  d["regions_used"] = p.stats.regions_used;
  d["regions_generated"] = p.stats.regions_generated;
  d["abstract_states"] = p.stats.abstract_states;
  d["expanded"] = p.stats.expanded;
  d["backtracks"] = p.stats.backtracks;
  d["forward_inputs"] = p.forward.inputs;
  d["back_inputs"] = p.back.inputs;
  std::vector<Vec> coords;
  for (const LatticePoint& q : p.forward.states) coords.push_back(q.coords);
  d["forward_states"] = coords;
  std::ostringstream os;
  write_plan(os, p);
  d["text"] = os.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic symbolic abstractions with a zoom quantizer";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<PrecisionBreachError>(m, "PrecisionBreachError", base.ptr());
  py::register_exception<NoPathError>(m, "NoPathError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<RangeExceededError>(m, "RangeExceededError", base.ptr());
  py::register_exception<InputOutOfRangeError>(m, "InputOutOfRangeError", base.ptr());

  py::class_<ZoomQuantizer>(m, "ZoomQuantizer")
      .def(py::init<int, Vec, double, double>(), py::arg("M"), py::arg("lambda_"),
           py::arg("lambda0") = 0.0, py::arg("mu") = 1.0)
      .def_readonly("M", &ZoomQuantizer::M)
      .def_readonly("lambda_", &ZoomQuantizer::lambda)
      .def_readonly("lambda0", &ZoomQuantizer::lambda0)
      .def_readonly("mu", &ZoomQuantizer::mu)
      .def("step", &ZoomQuantizer::step, py::arg("axis"))
      .def("with_mu", &ZoomQuantizer::with_mu, py::arg("mu"));

  m.def("zoom_quantize", [](const ZoomQuantizer& qz, const Vec& z) { return zoom_quantize(qz, z); },
        py::arg("qz"), py::arg("z"));
  m.def("zoom_indices", [](const ZoomQuantizer& qz, const Vec& z) { return zoom_indices(qz, z); },
        py::arg("qz"), py::arg("z"));
  m.def(
      "lattice_points",
      [](const Vec& lo, const Vec& hi, const ZoomQuantizer& qz) {
        std::vector<Vec> out;
        for (const LatticePoint& p : lattice_points(Box(lo, hi), 0, qz)) out.push_back(p.coords);
        return out;
      },
      py::arg("lo"), py::arg("hi"), py::arg("qz"));
  m.def(
      "lattice_count",
      [](const Vec& lo, const Vec& hi, const ZoomQuantizer& qz) { return lattice_count(Box(lo, hi), qz); },
      py::arg("lo"), py::arg("hi"), py::arg("qz"));

  m.def("model_names", &model_names);
  m.def(
      "integrate",
      [](const std::string& model, const Vec& x, const Vec& u, double tau, int steps) {
        return integrate(SampledSystem(make_model(model), tau, steps), x, u);
      },
      py::arg("model"), py::arg("x"), py::arg("u"), py::arg("tau"), py::arg("steps") = 16);

  m.def(
      "precision_ok",
      [](double epsilon, double gain, double rate, double tau, double lambda_max, double eta,
         double mu) {
        const PrecisionCheck c =
            precision_ok(PrecisionBudget{epsilon, exponential_bound(gain, rate), tau}, lambda_max,
                         eta, mu);
        return py::make_tuple(c.ok, c.margin);
      },
      py::arg("epsilon"), py::arg("gain"), py::arg("rate"), py::arg("tau"), py::arg("lambda_max"),
      py::arg("eta"), py::arg("mu"));

  m.def(
      "plan",
      [](const std::string& scenario_json) {
        const cli::Setup s = cli::resolve_setup(scenario_json, {});
        return plan_dict(plan(s.scenario, s.system(), s.qz, s.planner_options()));
      },
      py::arg("scenario_json"));

  m.def(
      "patrol",
      [](const std::string& scenario_json, int cycles) {
        const cli::Setup s = cli::resolve_setup(scenario_json, {});
        const SampledSystem sys = s.system();
        const PatrolPlan p = plan(s.scenario, sys, s.qz, s.planner_options());
        const PatrolRun run = patrol_loop(p, sys, s.scenario.initial_state, cycles);
        py::dict d;
        d["visits"] = run.log.visits;
        d["obstacle_hits"] = run.log.obstacle_hits.size();
        d["max_deviation"] = run.trajectory.max_deviation;
        std::vector<Vec> xs;
        for (const TrajectorySample& smp : run.trajectory.samples) xs.push_back(smp.x);
        d["states"] = xs;
        return d;
      },
      py::arg("scenario_json"), py::arg("cycles") = 1);

  m.def(
      "check",
      [](const std::string& scenario_json) {
        const cli::Setup s = cli::resolve_setup(scenario_json, {});
        const Region r = initial_region(s.scenario.initial_region, s.scenario.policy);
        const HarnessReport rep =
            theorem1_harness(s.system(), {r}, s.qz, s.scenario.budget, s.grid_pitch);
        py::dict d;
        d["holds"] = rep.verdict.holds;
        d["pairs"] = rep.pairs;
        d["triples_checked"] = rep.verdict.triples_checked;
        d["precision_margin"] = rep.precision_margin;
        d["endpoint_slack"] = rep.endpoint_slack;
        return d;
      },
      py::arg("scenario_json"));
}
