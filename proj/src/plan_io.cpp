#include <cstdio>
#include <ostream>
#include <string>

#include "dynq/planner.hpp"

namespace dynq {

namespace {

void put(std::ostream& os, std::span<const double> v) {
  for (double d : v) os << ' ' << d;
}

void put_box(std::ostream& os, const Box& b) {
  os << " lo";
  put(os, b.lo);
  os << " hi";
  put(os, b.hi);
}

void put_leg(std::ostream& os, const char* name, const Leg& leg) {
  os << name << ' ' << leg.steps() << '\n';
  for (std::size_t j = 0; j < leg.states.size(); ++j) {
    const LatticePoint& q = leg.states[j];
    os << "s " << q.region_id << ':';
    for (std::size_t l = 0; l < q.k.size(); ++l) os << (l ? "," : "") << q.k[l];
    put(os, q.coords);
    os << '\n';
    if (j < leg.inputs.size()) {
      os << "u";
      put(os, leg.inputs[j]);
      os << '\n';
    }
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void write_plan(std::ostream& os, const PatrolPlan& p) {
  const auto old = os.precision(17);
  os << "dynq-plan 1\n";
  os << "epsilon " << p.epsilon << '\n';
  os << "tau " << p.tau << '\n';
  os << "initial_state";
  put(os, p.initial_state);
  os << '\n';
  os << "state_box";
  put_box(os, p.state_box);
  os << '\n';
  os << "obstacles " << p.obstacles.size() << '\n';
  for (const Box& b : p.obstacles) {
    os << "obstacle";
    put_box(os, b);
    os << '\n';
  }
  os << "targets " << p.targets.size() << '\n';
  for (const Box& b : p.targets) {
    os << "target";
    put_box(os, b);
    os << '\n';
  }
  os << "stats regions_generated " << p.stats.regions_generated << " regions_used "
     << p.stats.regions_used << " abstract_states " << p.stats.abstract_states << " expanded "
     << p.stats.expanded << " backtracks " << p.stats.backtracks << '\n';
  os << "regions " << p.regions_used.size() << '\n';
  for (const Region& r : p.regions_used) {
    os << "region " << r.id << ' ' << r.mu << ' ' << r.eta << ' ' << r.omega;
    put_box(os, r.box);
    os << '\n';
  }
  put_leg(os, "forward", p.forward);
  put_leg(os, "back", p.back);
  os.precision(old);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, std::size_t input_dim) {
  const std::size_t n = tr.samples.empty() ? 0 : tr.samples.front().x.size();
  os << "step,t";
  for (std::size_t l = 1; l <= n; ++l) os << ",x" << l;
  for (std::size_t l = 1; l <= input_dim; ++l) os << ",u" << l;
  os << ",region_id,tube_deviation\n";
  const auto old = os.precision(12);
  for (const TrajectorySample& s : tr.samples) {
    os << s.step << ',' << s.t;
    for (double v : s.x) os << ',' << v;
    for (std::size_t l = 0; l < input_dim; ++l) {
      os << ',';
      if (l < s.u.size()) os << s.u[l];
    }
    os << ',' << s.region_id << ',' << s.deviation << '\n';
  }
  os.precision(old);
}

void write_plan_svg(std::ostream& os, const PatrolPlan& p, const Trajectory& tr) {
  const double scale = 60.0, pad = 10.0;
  const Box& ws = p.state_box;
  const double w = ws.width(0) * scale + 2 * pad;
  const double h = (ws.dim() > 1 ? ws.width(1) : 1.0) * scale + 2 * pad;
  auto px = [&](double x) { return fmt(pad + (x - ws.lo[0]) * scale); };
  auto py = [&](double y) {
    const double top = ws.dim() > 1 ? ws.hi[1] : 1.0;
    return fmt(pad + (top - y) * scale);
  };
  auto rect = [&](const Box& b, const std::string& style) {
    const double y0 = b.dim() > 1 ? b.lo[1] : 0.0, y1 = b.dim() > 1 ? b.hi[1] : 1.0;
    os << "  <rect x=\"" << px(b.lo[0]) << "\" y=\"" << py(y1) << "\" width=\""
       << fmt(b.width(0) * scale) << "\" height=\"" << fmt((y1 - y0) * scale) << "\" " << style
       << "/>\n";
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
     << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n";
  rect(ws, "fill=\"white\" stroke=\"black\" stroke-width=\"1\"");
  for (const Region& r : p.regions_used)
    rect(r.box, "fill=\"none\" stroke=\"#7f7f7f\" stroke-opacity=\"0.3\" stroke-width=\"0.5\"");
  for (const Box& b : p.obstacles) rect(b, "fill=\"black\"");
  for (const Box& b : p.targets) rect(b, "fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"");
  if (!tr.samples.empty()) {
    os << "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const Vec& x = tr.samples[i].x;
      os << (i ? " " : "") << px(x[0]) << ',' << py(x.size() > 1 ? x[1] : 0.5);
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace dynq
