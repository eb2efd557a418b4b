#include "dynq/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>

#include "dynq/errors.hpp"
#include "dynq/inputabs.hpp"

namespace dynq {

void Scenario::validate() const {
  const std::size_t n = state_box.dim();
  if (n == 0 || state_box.empty()) throw PreconditionError("scenario state_box is empty");
  if (initial_state.size() != n) throw PreconditionError("initial_state has the wrong dimension");
  if (!state_box.contains(initial_state)) throw PreconditionError("initial_state outside state_box");
  for (const Box& o : obstacles)
    if (o.contains(initial_state)) throw PreconditionError("initial_state inside an obstacle");
  if (targets.size() != 2) throw PreconditionError("scenario needs exactly two targets");
  for (const Box& t : targets)
    for (const Box& o : obstacles)
      if (t.intersects(o)) throw PreconditionError("target " + to_string(t) + " meets an obstacle");
  if (initial_region.dim() != n || !initial_region.contains(initial_state))
    throw PreconditionError("initial region must contain initial_state");
  policy.validate();
  budget.validate();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::acos(-1.0);
  a = std::fmod(a + two_pi / 2.0, two_pi);
  if (a < 0) a += two_pi;
  return a - two_pi / 2.0;
}

// Obstacle-aware shortest distance to a target over a grid on the position axes.
class DistanceField {
 public:
  DistanceField(const Box& workspace, std::size_t p, double res, std::span<const Box> obstacles,
                double inflate, const Box& target)
      : p_(p), res_(res) {
    lo_.assign(workspace.lo.begin(), workspace.lo.begin() + p);
    nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(workspace.width(0) / res)));
    ny_ = p > 1 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(workspace.width(1) / res)))
                : 1;
    d_.assign(nx_ * ny_, kInf);
    blocked_.assign(nx_ * ny_, 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    for (std::size_t c = 0; c < d_.size(); ++c) {
      const Vec x = center(c);
      for (const Box& o : obstacles)
        if (o.inflated(inflate).contains(x)) blocked_[c] = 1;
      if (!blocked_[c] && target.contains(x)) {
        d_[c] = 0.0;
        open.push({0.0, c});
      }
    }
    if (open.empty()) {
      // Target smaller than a cell: seed the cell holding its center.
      const std::size_t c = cell(target.center());
      if (!blocked_[c]) {
        d_[c] = 0.0;
        open.push({0.0, c});
      }
    }
    while (!open.empty()) {
      auto [dist, c] = open.top();
      open.pop();
      if (dist > d_[c]) continue;
      for (auto [nb, w] : neighbours(c)) {
        if (blocked_[nb] || dist + w >= d_[nb]) continue;
        d_[nb] = dist + w;
        open.push({d_[nb], nb});
      }
    }
  }

  double at(std::span<const double> x) const {
    const std::size_t c = cell(x);
    return blocked_[c] ? kInf : d_[c];
  }

  // Direction of steepest descent on the position plane.
  std::optional<double> direction(std::span<const double> x) const {
    if (p_ < 2) return std::nullopt;
    const std::size_t c = cell(x);
    double best = d_[c];
    std::optional<double> dir;
    for (auto [nb, w] : neighbours(c)) {
      if (blocked_[nb] || d_[nb] >= best) continue;
      best = d_[nb];
      const double dx = static_cast<double>(nb % nx_) - static_cast<double>(c % nx_);
      const double dy = static_cast<double>(nb / nx_) - static_cast<double>(c / nx_);
      dir = std::atan2(dy, dx);
    }
    return dir;
  }

 private:
  Vec center(std::size_t c) const {
    Vec x(p_);
    x[0] = lo_[0] + (static_cast<double>(c % nx_) + 0.5) * res_;
    if (p_ > 1) x[1] = lo_[1] + (static_cast<double>(c / nx_) + 0.5) * res_;
    return x;
  }

  std::size_t cell(std::span<const double> x) const {
    auto idx = [&](std::size_t axis, std::size_t count) {
      const double f = std::floor((x[axis] - lo_[axis]) / res_);
      return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(count - 1)));
    };
    const std::size_t i = idx(0, nx_);
    const std::size_t j = p_ > 1 ? idx(1, ny_) : 0;
    return j * nx_ + i;
  }

  std::vector<std::pair<std::size_t, double>> neighbours(std::size_t c) const {
    std::vector<std::pair<std::size_t, double>> out;
    const long i = static_cast<long>(c % nx_), j = static_cast<long>(c / nx_);
    for (long dj = -1; dj <= 1; ++dj)
      for (long di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const long ni = i + di, nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= static_cast<long>(nx_) || nj >= static_cast<long>(ny_)) continue;
        out.emplace_back(static_cast<std::size_t>(nj) * nx_ + static_cast<std::size_t>(ni),
                         (di != 0 && dj != 0 ? std::sqrt(2.0) : 1.0) * res_);
      }
    return out;
  }

  std::size_t p_;
  double res_;
  Vec lo_;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<double> d_;
  std::vector<char> blocked_;
};

struct Node {
  LatticePoint q;
  Vec shadow;
  long parent = -1;
  Vec input;  // applied at the parent
};

struct Exit {
  std::size_t node = 0;
  Vec input;
  Vec x_new;
  Region region;
  double score = 0.0;
  std::size_t depth = 0;
};

struct Frame {
  Region region;
  std::vector<Node> nodes;
  std::vector<Exit> exits;
  std::size_t next = 0;
  long goal = -1;
};

struct LegResult {
  std::vector<Region> regions;  // every region on the leg, first is the start region
  std::vector<LatticePoint> states;
  std::vector<Vec> shadows;
  std::vector<Vec> inputs;
};

class Search {
 public:
  Search(const Scenario& scn, const SampledSystem& sys, const ZoomQuantizer& qz,
         const PlannerOptions& opt, PlanStats& stats, int& next_id)
      : scn_(scn), sys_(sys), qz_(qz), opt_(opt), stats_(stats), next_id_(next_id),
        rng_(scn.seed) {
    p_ = std::min(opt.position_axes, sys.state_dim());
    if (opt.heading_axis >= static_cast<int>(sys.state_dim()))
      throw PreconditionError("heading axis out of range");
  }

  /// Searches until a shadow lies in `goal`; the distance field leads to `target`.
  LegResult run(const Region& start, const LatticePoint& q0, const Vec& x0, const Box& target,
                const Box& goal) {
    const double half_cell = 0.5 * qz_.lambda_max() * start.mu;
    auto field = std::make_unique<DistanceField>(scn_.state_box, p_, opt_.heuristic_resolution,
                                                 scn_.obstacles, half_cell + opt_.obstacle_clearance,
                                                 target);
    if (!std::isfinite(field->at(x0))) {
      field = std::make_unique<DistanceField>(scn_.state_box, p_, opt_.heuristic_resolution,
                                              scn_.obstacles, 0.0, target);
      if (!std::isfinite(field->at(x0)))
        throw NoPathError("target " + to_string(target) + " is not reachable from " +
                          to_string(x0) + " in the free workspace");
    }
    field_ = field.get();
    goal_ = &goal;
    placements_.clear();
    placements_.insert(placement_key(start));

    std::vector<Frame> stack;
    stack.push_back(open_frame(start, Node{q0, x0, -1, {}}));
    while (true) {
      Frame& top = stack.back();
      if (top.goal >= 0) return assemble(stack);
      if (top.next >= top.exits.size()) {
        stack.pop_back();
        ++stats_.backtracks;
        if (stack.empty())
          throw NoPathError("search exhausted without reaching " + to_string(target));
        continue;
      }
      const Exit ex = top.exits[top.next++];
      const Node& from = top.nodes[ex.node];
      Region region = ex.region;
      region.id = next_id_++;
      mu_of_[region.id] = region.mu;
      ++stats_.regions_generated;
      if (stats_.regions_generated > opt_.max_regions)
        throw NoPathError("region budget of " + std::to_string(opt_.max_regions) + " exhausted");
      LatticePoint q = make_lattice_point(qz_.with_mu(region.mu), region.id,
                                          zoom_indices(qz_.with_mu(region.mu), ex.x_new));
      auto shadow = step_ok(from, top.region, ex.input, q);
      if (!shadow) continue;
      stack.push_back(open_frame(region, Node{std::move(q), std::move(*shadow), -1, {}}));
    }
  }

 private:
  bool goal(const Vec& shadow) const { return goal_->contains(shadow); }

  // Checks of a single transition; returns the concrete successor if accepted.
  std::optional<Vec> step_ok(const Node& from, const Region& from_region, const Vec& u,
                             const LatticePoint& q) const {
    Vec x;
    try {
      x = integrate(sys_, from.shadow, u);
    } catch (const NonFiniteError&) {
      return std::nullopt;
    }
    if (!scn_.state_box.contains(x) || !scn_.state_box.contains(q.coords, 1e-9)) return std::nullopt;
    if (inf_dist(x, q.coords) > scn_.budget.epsilon - opt_.tube_margin) return std::nullopt;
    const Box cell = Box::centered(q.coords, half_cells(q));
    for (const Box& o : scn_.obstacles) {
      if (cell.intersects(o)) return std::nullopt;
      if (o.inflated(opt_.obstacle_clearance).contains(x)) return std::nullopt;
    }
    if (sys_.system().reverse_input) {
      const Vec back = integrate(sys_, q.coords, sys_.system().reverse_input(u));
      if (!from_region.box.contains(back, 1e-12)) return std::nullopt;
      if (zoom_indices(qz_.with_mu(from_region.mu), back) != from.q.k) return std::nullopt;
    }
    return x;
  }

  Vec half_cells(const LatticePoint& q) const {
    const ZoomQuantizer at = qz_.with_mu(region_mu(q));
    Vec h(q.coords.size());
    for (std::size_t l = 0; l < h.size(); ++l) h[l] = 0.5 * at.step(l);
    return h;
  }

  double region_mu(const LatticePoint& q) const { return mu_of_.at(q.region_id); }

  double score(const Vec& x) const {
    double s = field_->at(x);
    if (opt_.heading_axis >= 0 && opt_.heading_weight > 0.0) {
      if (auto dir = field_->direction(x))
        s += opt_.heading_weight * std::abs(wrap_angle(x[opt_.heading_axis] - *dir));
    }
    return s;
  }

  Frame open_frame(const Region& region, Node entry) {
    mu_of_[region.id] = region.mu;
    Frame f;
    f.region = region;
    f.nodes.push_back(std::move(entry));
    if (goal(f.nodes[0].shadow)) {
      f.goal = 0;
      return f;
    }
    const InputLattice lat = input_lattice(region, sys_.system().input_box);
    const ZoomQuantizer at = qz_.with_mu(region.mu);
    std::set<std::vector<int>> seen{f.nodes[0].q.k};
    std::vector<std::size_t> depth{0};
    std::vector<Exit> exits;
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      ++stats_.expanded;
      const ReachCloud cloud = reach_cloud(sys_, f.nodes[i].q, lat, region);
      InputMenu menu;
      try {
        menu = build_menu(cloud, region, qz_);
      } catch (const EmptyMenuError&) {
        continue;
      }
      std::map<Vec, Vec> endpoint;
      for (const ReachSample& s : cloud.samples) endpoint.emplace(s.input, s.endpoint);
      for (const Vec& u : menu.inputs()) {
        const Vec& y = endpoint.at(u);
        const Zone z = classify(y, region);
        if (z == Zone::inside_core) {
          std::vector<int> k = zoom_indices(at, y);
          if (seen.count(k)) continue;
          LatticePoint q = make_lattice_point(at, region.id, k);
          auto shadow = step_ok(f.nodes[i], region, u, q);
          if (!shadow) continue;
          seen.insert(std::move(k));
          f.nodes.push_back(Node{std::move(q), std::move(*shadow), static_cast<long>(i), u});
          depth.push_back(depth[i] + 1);
          if (goal(f.nodes.back().shadow)) {
            f.goal = static_cast<long>(f.nodes.size() - 1);
            return f;
          }
        } else if (z == Zone::boundary_band) {
          Exit ex;
          ex.node = i;
          ex.input = u;
          ex.x_new = y;
          ex.depth = depth[i] + 1;
          exits.push_back(std::move(ex));
        }
      }
    }
    rank_exits(f, exits);
    return f;
  }

  void rank_exits(Frame& f, std::vector<Exit>& exits) {
    const EventState e = update_events(f.region, scn_.obstacles, scn_.targets, true);
    PrecisionGuard guard = [this](double mu, double eta) {
      const PrecisionCheck c = precision_ok(scn_.budget, qz_.lambda_max(), eta, mu);
      if (!c.ok)
        throw PrecisionBreachError("generated region breaks the precision budget: margin " +
                                   std::to_string(c.margin));
    };
    std::vector<Exit> kept;
    for (Exit& ex : exits) {
      try {
        ex.region = next_region(ex.x_new, f.region, e, scn_.policy, &qz_, guard);
      } catch (const DegenerateRegionError&) {
        continue;
      }
      ex.score = score(ex.x_new);
      if (!std::isfinite(ex.score)) continue;
      kept.push_back(std::move(ex));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const Exit& a, const Exit& b) {
      if (a.score != b.score) return a.score < b.score;
      return a.depth < b.depth;
    });
    if (opt_.mode == SearchMode::goal_biased_tree) {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (coin(rng_) >= opt_.goal_bias) {
        for (std::size_t i = kept.size(); i > 1; --i)
          std::swap(kept[i - 1], kept[rng_() % i]);
      }
    }
    // One exit per new placement, never a placement seen before.
    for (Exit& ex : kept) {
      if (f.exits.size() >= opt_.exits_per_region) break;
      if (!placements_.insert(placement_key(ex.region)).second) continue;
      f.exits.push_back(std::move(ex));
    }
  }

  static Vec placement_key(const Region& r) {
    Vec key = r.box.lo;
    for (double& v : key) v = std::round(v * 1e9) / 1e9;
    return key;
  }

  LegResult assemble(const std::vector<Frame>& stack) const {
    LegResult out;
    for (std::size_t fi = 0; fi < stack.size(); ++fi) {
      const Frame& f = stack[fi];
      out.regions.push_back(f.region);
      const long last = fi + 1 < stack.size() ? static_cast<long>(f.exits[f.next - 1].node) : f.goal;
      std::vector<long> chain;
      for (long i = last; i >= 0; i = f.nodes[i].parent) chain.push_back(i);
      std::reverse(chain.begin(), chain.end());
      for (long i : chain) {
        if (f.nodes[i].parent >= 0) out.inputs.push_back(f.nodes[i].input);
        out.states.push_back(f.nodes[i].q);
        out.shadows.push_back(f.nodes[i].shadow);
      }
      if (fi + 1 < stack.size()) out.inputs.push_back(f.exits[f.next - 1].input);
    }
    return out;
  }

  const Scenario& scn_;
  const SampledSystem& sys_;
  const ZoomQuantizer& qz_;
  const PlannerOptions& opt_;
  PlanStats& stats_;
  int& next_id_;
  std::mt19937_64 rng_;
  std::size_t p_ = 2;
  const DistanceField* field_ = nullptr;
  const Box* goal_ = nullptr;
  std::map<int, double> mu_of_;
  std::set<Vec> placements_;
};

// Successor of q under u in the abstraction over `regions`: the endpoint is
// quantized by the most recent region containing it.
std::optional<LatticePoint> abstract_successor(const SampledSystem& sys, const ZoomQuantizer& qz,
                                               const std::vector<Region>& regions,
                                               const LatticePoint& q, const Vec& u) {
  const Vec x = integrate(sys, q.coords, u);
  const auto owner = owning_region(regions, x);
  if (!owner) return std::nullopt;
  const Region& r = regions[*owner];
  const ZoomQuantizer at = qz.with_mu(r.mu);
  LatticePoint p = make_lattice_point(at, r.id, zoom_indices(at, x));
  if (!r.box.contains(p.coords, 1e-9)) return std::nullopt;
  return p;
}

Leg relabel(const SampledSystem& sys, const ZoomQuantizer& qz, const std::vector<Region>& regions,
            const LatticePoint& start, const std::vector<Vec>& inputs) {
  Leg leg;
  leg.states.push_back(start);
  for (const Vec& u : inputs) {
    auto next = abstract_successor(sys, qz, regions, leg.states.back(), u);
    if (!next) throw RelationBreachError("plan step leaves the abstraction");
    leg.states.push_back(std::move(*next));
    leg.inputs.push_back(u);
  }
  return leg;
}

}  // namespace

PatrolPlan plan(const Scenario& scn, const SampledSystem& sys, const ZoomQuantizer& qz,
                const PlannerOptions& options) {
  scn.validate();
  if (scn.state_box.dim() != sys.state_dim())
    throw PreconditionError("scenario and system dimensions differ");
  const Region s0 = initial_region(scn.initial_region, scn.policy);
  {
    const PrecisionCheck c = precision_ok(scn.budget, qz.lambda_max(), s0.eta, s0.mu);
    if (!c.ok)
      throw PrecisionBreachError("initial region breaks the precision budget: margin " +
                                 std::to_string(c.margin));
  }
  const ZoomQuantizer at0 = qz.with_mu(s0.mu);
  const LatticePoint q0 = make_lattice_point(at0, s0.id, zoom_indices(at0, scn.initial_state));
  if (inf_dist(q0.coords, scn.initial_state) > scn.budget.epsilon)
    throw PreconditionError("initial state is farther than epsilon from its abstract state");

  PatrolPlan out;
  int next_id = s0.id + 1;
  Search search(scn, sys, qz, options, out.stats, next_id);
  const auto& reverse = sys.system().reverse_input;
  // Without exact reversal the loop is closed by a third search back to the
  // initial state, and the next cycle replays the forward inputs from there;
  // legs then aim that far inside their targets.
  const double slack = reverse ? 0.0 : options.home_radius;
  auto inner = [&](const Box& t) {
    const Box b = t.inflated(-slack);
    return b.empty() ? t : b;
  };
  const Box goal1 = inner(scn.targets[1]);
  LegResult fwd = search.run(s0, q0, scn.initial_state, scn.targets[1], goal1);

  std::vector<Region> regions = fwd.regions;
  std::vector<Vec> back_inputs;
  LatticePoint back_start = fwd.states.back();
  if (reverse) {
    for (auto it = fwd.inputs.rbegin(); it != fwd.inputs.rend(); ++it) back_inputs.push_back(reverse(*it));
  } else {
    const Box goal0 = inner(scn.targets[0]);
    LegResult bwd = search.run(fwd.regions.back(), fwd.states.back(), fwd.shadows.back(), scn.targets[0], goal0);
    regions.insert(regions.end(), bwd.regions.begin() + 1, bwd.regions.end());
    back_inputs = bwd.inputs;
    const Box home = Box::centered(scn.initial_state, Vec(scn.initial_state.size(), slack));
    LegResult close = search.run(bwd.regions.back(), bwd.states.back(), bwd.shadows.back(), home, home);
    regions.insert(regions.end(), close.regions.begin() + 1, close.regions.end());
    back_inputs.insert(back_inputs.end(), close.inputs.begin(), close.inputs.end());
  }

  // Sequential ids for the regions kept, then successors named after the
  // regions that own them in the final abstraction.
  std::map<int, int> rename;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    rename[regions[i].id] = static_cast<int>(i);
    regions[i].id = static_cast<int>(i);
  }
  LatticePoint start = q0;
  start.region_id = rename.at(q0.region_id);
  out.forward = relabel(sys, qz, regions, start, fwd.inputs);
  back_start = out.forward.states.back();
  out.back = relabel(sys, qz, regions, back_start, back_inputs);

  out.regions_used = regions;
  out.stats.regions_used = regions.size();
  for (const Region& r : regions) out.stats.abstract_states += lattice_points(r, qz).size();
  out.epsilon = scn.budget.epsilon;
  out.tau = sys.tau();
  out.initial_state = scn.initial_state;
  out.state_box = scn.state_box;
  out.obstacles = scn.obstacles;
  out.targets = scn.targets;
  return out;
}

AbstractSystem plan_abstraction(const PatrolPlan& p, const SampledSystem& sys,
                                const ZoomQuantizer& qz, const PrecisionBudget& budget) {
  BuildOptions opt;
  opt.dedup_overlaps = false;
  return build_abstraction(sys, p.regions_used, qz, budget, opt);
}

// ---------------------------------------------------------------------------
// Refinement

namespace {

void replay(const Leg& leg, const SampledSystem& sys, double epsilon, Trajectory& tr, Vec& x,
            std::size_t& step) {
  auto record = [&](std::size_t j) {
    TrajectorySample s;
    s.step = step;
    s.t = static_cast<double>(step) * sys.tau();
    s.x = x;
    s.region_id = leg.states[j].region_id;
    s.abstract = leg.states[j].coords;
    s.deviation = inf_dist(x, s.abstract);
    tr.max_deviation = std::max(tr.max_deviation, s.deviation);
    if (s.deviation > epsilon)
      throw RelationBreachError("concrete state " + to_string(x) + " is " +
                                std::to_string(s.deviation) + " from abstract state " +
                                to_string(s.abstract) + " at step " + std::to_string(step) +
                                " (epsilon " + std::to_string(epsilon) + ")");
    tr.samples.push_back(std::move(s));
  };
  if (leg.states.size() != leg.inputs.size() + 1) throw PreconditionError("malformed leg");
  if (tr.samples.empty()) record(0);
  for (std::size_t j = 0; j < leg.inputs.size(); ++j) {
    tr.samples.back().u = leg.inputs[j];
    x = integrate(sys, x, leg.inputs[j]);
    ++step;
    record(j + 1);
  }
}

}  // namespace

Trajectory refine(const Leg& leg, const SampledSystem& sys, std::span<const double> x0,
                  double epsilon) {
  if (leg.states.empty()) throw PreconditionError("empty leg");
  Trajectory tr;
  Vec x(x0.begin(), x0.end());
  std::size_t step = 0;
  replay(leg, sys, epsilon, tr, x, step);
  return tr;
}

Trajectory refine(const PatrolPlan& p, const SampledSystem& sys, std::span<const double> x0) {
  Trajectory tr;
  Vec x(x0.begin(), x0.end());
  std::size_t step = 0;
  replay(p.forward, sys, p.epsilon, tr, x, step);
  replay(p.back, sys, p.epsilon, tr, x, step);
  return tr;
}

VisitLog visit_log(const Trajectory& tr, std::span<const Box> targets,
                   std::span<const Box> obstacles) {
  VisitLog log;
  log.inside.resize(targets.size());
  log.visits.assign(targets.size(), 0);
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const Vec& x = tr.samples[i].x;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (!targets[t].contains(x)) continue;
      if (log.inside[t].empty() || log.inside[t].back() + 1 != i) ++log.visits[t];
      log.inside[t].push_back(i);
    }
    for (const Box& o : obstacles)
      if (o.contains(x)) {
        log.obstacle_hits.push_back(i);
        break;
      }
  }
  return log;
}

PatrolRun patrol_loop(const PatrolPlan& p, const SampledSystem& sys, std::span<const double> x0,
                      int cycles) {
  if (cycles < 1) throw PreconditionError("patrol_loop needs cycles >= 1");
  PatrolRun run;
  Vec x(x0.begin(), x0.end());
  std::size_t step = 0;
  for (int c = 0; c < cycles; ++c) {
    replay(p.forward, sys, p.epsilon, run.trajectory, x, step);
    replay(p.back, sys, p.epsilon, run.trajectory, x, step);
  }
  run.log = visit_log(run.trajectory, p.targets, p.obstacles);
  return run;
}

}  // namespace dynq
