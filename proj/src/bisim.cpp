#include "dynq/bisim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "dynq/errors.hpp"

namespace dynq {

std::size_t FiniteTS::add_state(Vec output) {
  outputs.push_back(std::move(output));
  edges.emplace_back();
  return outputs.size() - 1;
}

void FiniteTS::add_transition(std::size_t from, std::size_t input, std::size_t to) {
  if (from >= edges.size()) edges.resize(from + 1);
  edges[from].push_back({input, to});
}

void FiniteTS::finalize() {
  if (edges.size() > outputs.size())
    throw PreconditionError("transition leaves from an undeclared state");
  edges.resize(outputs.size());
  for (auto& row : edges) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (const Edge& e : row) {
      if (e.input >= num_inputs) throw PreconditionError("transition uses an undeclared input");
      if (e.successor >= outputs.size())
        throw PreconditionError("transition targets an undeclared state");
    }
  }
  for (std::size_t s : initial)
    if (s >= outputs.size()) throw PreconditionError("undeclared initial state");
  if (!input_labels.empty() && input_labels.size() != num_inputs)
    throw PreconditionError("input label count differs from the alphabet size");
}

std::span<const FiniteTS::Edge> FiniteTS::successors(std::size_t state, std::size_t input) const {
  const auto& row = edges.at(state);
  auto lo = std::lower_bound(row.begin(), row.end(), Edge{input, 0});
  auto hi = lo;
  while (hi != row.end() && hi->input == input) ++hi;
  return {lo, hi};
}

std::vector<std::size_t> FiniteTS::enabled(std::size_t state) const {
  std::vector<std::size_t> out;
  for (const Edge& e : edges.at(state))
    if (out.empty() || out.back() != e.input) out.push_back(e.input);
  return out;
}

FiniteTS to_finite_ts(const AbstractSystem& abs) {
  FiniteTS ts;
  ts.num_inputs = abs.num_inputs();
  ts.input_labels = abs.inputs;
  ts.initial = abs.initial;
  for (const LatticePoint& p : abs.states) ts.add_state(p.coords);
  for (std::size_t s = 0; s < abs.num_states(); ++s)
    for (const auto& t : abs.transitions[s]) ts.add_transition(s, t.input, t.successor);
  ts.finalize();
  return ts;
}

Relation::Relation(std::vector<std::pair<std::size_t, std::size_t>> pairs) : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

void Relation::insert(std::size_t a, std::size_t b) {
  const std::pair<std::size_t, std::size_t> p{a, b};
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
  if (it == pairs_.end() || *it != p) pairs_.insert(it, p);
}

bool Relation::contains(std::size_t a, std::size_t b) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), std::pair{a, b});
}

Relation Relation::inverse() const {
  std::vector<std::pair<std::size_t, std::size_t>> inv;
  inv.reserve(pairs_.size());
  for (auto [a, b] : pairs_) inv.emplace_back(b, a);
  return Relation(std::move(inv));
}

Relation Relation::identity(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(i, i);
  return Relation(std::move(p));
}

Relation Relation::within(const FiniteTS& t1, const FiniteTS& t2, double eps) {
  std::vector<std::pair<std::size_t, std::size_t>> p;
  for (std::size_t a = 0; a < t1.num_states(); ++a)
    for (std::size_t b = 0; b < t2.num_states(); ++b)
      if (inf_dist(t1.outputs[a], t2.outputs[b]) <= eps) p.emplace_back(a, b);
  return Relation(std::move(p));
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::output_distance: return "output_distance";
    case Condition::forward_match: return "forward_match";
    case Condition::backward_match: return "backward_match";
    case Condition::left_total: return "left_total";
    case Condition::right_total: return "right_total";
  }
  return "unknown";
}

namespace {

void check_alphabets(const FiniteTS& t1, const FiniteTS& t2) {
  if (t1.num_inputs != t2.num_inputs)
    throw InputMismatchError("transition systems have " + std::to_string(t1.num_inputs) + " and " +
                             std::to_string(t2.num_inputs) + " inputs");
  if (!t1.input_labels.empty() && !t2.input_labels.empty()) {
    for (std::size_t j = 0; j < t1.num_inputs; ++j)
      if (inf_dist(t1.input_labels[j], t2.input_labels[j]) > 1e-12 ||
          t1.input_labels[j].size() != t2.input_labels[j].size())
        throw InputMismatchError("input " + std::to_string(j) + " differs between the systems");
  }
}

class Checker {
 public:
  Checker(const FiniteTS& t1, const FiniteTS& t2, const Relation& r, double eps,
          const CheckOptions& opt)
      : t1_(t1), t2_(t2), r_(r), eps_(eps), opt_(opt) {
    v_.worst_slack = std::numeric_limits<double>::infinity();
  }

  Verdict run(bool both_ways) {
    check_alphabets(t1_, t2_);
    for (auto [x1, x2] : r_.pairs()) {
      if (x1 >= t1_.num_states() || x2 >= t2_.num_states())
        throw PreconditionError("relation references an undeclared state");
      const double d = inf_dist(t1_.outputs[x1], t2_.outputs[x2]);
      slack(eps_ - d);
      if (d > eps_) fail({x1, x2, std::nullopt, std::nullopt, Condition::output_distance, d});
      for (std::size_t u = 0; u < t1_.num_inputs; ++u) {
        ++v_.triples_checked;
        match(x1, x2, u, false);
        if (both_ways) match(x1, x2, u, true);
      }
    }
    totality(false);
    if (both_ways) totality(true);
    if (!std::isfinite(v_.worst_slack)) v_.worst_slack = 0.0;
    return v_;
  }

 private:
  bool related(std::size_t s1, std::size_t s2) const {
    return opt_.successor_related ? opt_.successor_related(s1, s2) : r_.contains(s1, s2);
  }

  // Every successor on one side needs a related successor on the other.
  void match(std::size_t x1, std::size_t x2, std::size_t u, bool backward) {
    const auto mine = backward ? t2_.successors(x2, u) : t1_.successors(x1, u);
    const auto theirs = backward ? t1_.successors(x1, u) : t2_.successors(x2, u);
    for (const auto& e : mine) {
      double best = std::numeric_limits<double>::infinity();
      bool found = false;
      for (const auto& f : theirs) {
        const std::size_t s1 = backward ? f.successor : e.successor;
        const std::size_t s2 = backward ? e.successor : f.successor;
        const double d = inf_dist(t1_.outputs[s1], t2_.outputs[s2]);
        if (related(s1, s2)) {
          if (!found || d < best) best = d;
          found = true;
        } else if (!found) {
          best = std::min(best, d);
        }
      }
      if (found) {
        slack(eps_ + opt_.successor_tolerance - best);
      } else {
        fail({x1, x2, u, e.successor,
              backward ? Condition::backward_match : Condition::forward_match, best});
      }
    }
  }

  void totality(bool right) {
    const std::size_t n = right ? t2_.num_states() : t1_.num_states();
    std::vector<char> seen(n, 0);
    for (auto [a, b] : r_.pairs()) seen[right ? b : a] = 1;
    for (std::size_t s = 0; s < n; ++s) {
      if (seen[s]) continue;
      Witness w;
      w.x1 = right ? 0 : s;
      w.x2 = right ? s : 0;
      w.condition = right ? Condition::right_total : Condition::left_total;
      w.distance = std::numeric_limits<double>::infinity();
      fail(w);
      return;
    }
  }

  void slack(double s) { v_.worst_slack = std::min(v_.worst_slack, s); }

  void fail(const Witness& w) {
    v_.holds = false;
    if (!v_.witness) v_.witness = w;
  }

  const FiniteTS& t1_;
  const FiniteTS& t2_;
  const Relation& r_;
  double eps_;
  const CheckOptions& opt_;
  Verdict v_;
};

}  // namespace

Verdict check_simulation(const FiniteTS& t1, const FiniteTS& t2, const Relation& r, double eps,
                         const CheckOptions& options) {
  return Checker(t1, t2, r, eps, options).run(false);
}

Verdict check_bisimulation(const FiniteTS& t1, const FiniteTS& t2, const Relation& r, double eps,
                           const CheckOptions& options) {
  return Checker(t1, t2, r, eps, options).run(true);
}

void write_verdict(std::ostream& os, const Verdict& v) {
  const auto old = os.precision(17);
  os << "verdict " << (v.holds ? "holds" : "fails") << '\n';
  os << "triples_checked " << v.triples_checked << '\n';
  os << "worst_slack " << v.worst_slack << '\n';
  if (v.witness) {
    const Witness& w = *v.witness;
    os << "witness condition " << to_string(w.condition) << " x1 " << w.x1 << " x2 " << w.x2
       << " input ";
    if (w.input) os << *w.input; else os << '-';
    os << " successor ";
    if (w.successor) os << *w.successor; else os << '-';
    os << " distance " << w.distance << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Grid harness for the epsilon relation between concrete and abstract systems

namespace {

double min_precision_margin(const std::vector<Region>& regions, const ZoomQuantizer& qz,
                            const PrecisionBudget& budget) {
  budget.validate();
  double margin = std::numeric_limits<double>::infinity();
  for (const Region& r : regions) {
    const PrecisionCheck c = precision_ok(budget, qz.lambda_max(), r.eta, r.mu);
    margin = std::min(margin, c.margin);
    if (!c.ok)
      throw PrecisionBreachError("region " + std::to_string(r.id) +
                                 " breaks the precision budget: margin " + std::to_string(c.margin));
  }
  return margin;
}

}  // namespace

HarnessReport theorem1_harness(const SampledSystem& sys, const std::vector<Region>& regions,
                               const ZoomQuantizer& qz, const PrecisionBudget& budget,
                               double grid_pitch) {
  if (regions.empty()) throw PreconditionError("theorem1_harness: no regions");
  min_precision_margin(regions, qz, budget);
  return theorem1_harness(sys, build_abstraction(sys, regions, qz, budget), budget, grid_pitch);
}

HarnessReport theorem1_harness(const SampledSystem& sys, const AbstractSystem& abs,
                               const PrecisionBudget& budget, double grid_pitch) {
  if (!(grid_pitch > 0.0)) throw PreconditionError("grid pitch must be positive");
  if (abs.regions.empty()) throw PreconditionError("theorem1_harness: no regions");
  HarnessReport rep;
  rep.grid_pitch = grid_pitch;
  rep.epsilon = budget.epsilon;
  rep.precision_margin = min_precision_margin(abs.regions, abs.quantizer, budget);

  const std::size_t n = abs.state_dim;
  Box hull = abs.regions.front().box;
  for (const Region& r : abs.regions)
    for (std::size_t l = 0; l < n; ++l) {
      hull.lo[l] = std::min(hull.lo[l], r.box.lo[l]);
      hull.hi[l] = std::max(hull.hi[l], r.box.hi[l]);
    }

  // Concrete grid points inside the union of the regions, lexicographic.
  FiniteTS t1;
  t1.num_inputs = abs.num_inputs();
  t1.input_labels = abs.inputs;
  std::map<std::vector<long>, std::size_t> grid_index;
  std::vector<std::pair<long, long>> range(n);
  for (std::size_t l = 0; l < n; ++l) range[l] = axis_index_range(hull.lo[l], hull.hi[l], grid_pitch);
  std::vector<long> k(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (range[l].first > range[l].second) throw PreconditionError("grid misses the regions");
    k[l] = range[l].first;
  }
  for (bool more = true; more;) {
    Vec x(n);
    for (std::size_t l = 0; l < n; ++l) x[l] = static_cast<double>(k[l]) * grid_pitch;
    if (owning_region(abs.regions, x)) {
      grid_index[k] = t1.add_state(std::move(x));
    }
    more = false;
    for (std::size_t l = n; l-- > 0;) {
      if (k[l] < range[l].second) {
        ++k[l];
        more = true;
        break;
      }
      k[l] = range[l].first;
    }
  }
  for (std::size_t s = 0; s < t1.num_states(); ++s) t1.initial.push_back(s);

  const FiniteTS t2 = to_finite_ts(abs);
  const Relation r = Relation::within(t1, t2, budget.epsilon);

  // Concrete successors: exact endpoints snapped to the grid; an endpoint
  // outside every region or off the grid disables the input.
  std::vector<std::vector<Vec>> endpoints(t1.num_states(), std::vector<Vec>(abs.num_inputs()));
  for (std::size_t s = 0; s < t1.num_states(); ++s) {
    for (std::size_t u = 0; u < abs.num_inputs(); ++u) {
      Vec y = integrate(sys, t1.outputs[s], abs.inputs[u]);
      if (owning_region(abs.regions, y)) {
        std::vector<long> idx(n);
        for (std::size_t l = 0; l < n; ++l) idx[l] = std::lround(y[l] / grid_pitch);
        auto it = grid_index.find(idx);
        if (it != grid_index.end()) t1.add_transition(s, u, it->second);
      }
      endpoints[s][u] = std::move(y);
    }
  }
  t1.finalize();

  CheckOptions opt;
  const double relaxed = budget.epsilon + grid_pitch / 2.0;
  opt.successor_related = [&](std::size_t s1, std::size_t s2) {
    return inf_dist(t1.outputs[s1], t2.outputs[s2]) <= relaxed;
  };
  opt.successor_tolerance = grid_pitch / 2.0;
  rep.verdict = check_bisimulation(t1, t2, r, budget.epsilon, opt);

  double worst = -std::numeric_limits<double>::infinity();
  for (auto [x, q] : r.pairs()) {
    for (std::size_t u = 0; u < abs.num_inputs(); ++u) {
      const auto q_next = abs.successor(q, u);
      if (!q_next || t1.successors(x, u).empty()) continue;
      worst = std::max(worst, inf_dist(endpoints[x][u], abs.states[*q_next].coords));
    }
  }
  rep.endpoint_slack = std::isfinite(worst) ? budget.epsilon - worst : budget.epsilon;
  rep.concrete_states = t1.num_states();
  rep.abstract_states = t2.num_states();
  rep.inputs = abs.num_inputs();
  rep.pairs = r.size();
  return rep;
}

void write_harness_report(std::ostream& os, const HarnessReport& rep) {
  const auto old = os.precision(17);
  os << "concrete_states " << rep.concrete_states << '\n';
  os << "abstract_states " << rep.abstract_states << '\n';
  os << "inputs " << rep.inputs << '\n';
  os << "pairs " << rep.pairs << '\n';
  os << "grid_pitch " << rep.grid_pitch << '\n';
  os << "epsilon " << rep.epsilon << '\n';
  os << "precision_margin " << rep.precision_margin << '\n';
  os << "endpoint_slack " << rep.endpoint_slack << '\n';
  os.precision(old);
  write_verdict(os, rep.verdict);
}

}  // namespace dynq
