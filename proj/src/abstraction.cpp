#include "dynq/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "dynq/errors.hpp"
#include "dynq/inputabs.hpp"
#include "dynq/regions.hpp"

namespace dynq {

void PrecisionBudget::validate() const {
  if (!(epsilon > 0.0)) throw PreconditionError("precision epsilon must be positive");
  if (!(tau > 0.0)) throw PreconditionError("precision budget needs tau > 0");
  if (!beta.beta) throw PreconditionError("precision budget has no stability bound");
  if (!(beta(epsilon, tau) < epsilon))
    throw PrecisionBreachError("beta(eps, tau) >= eps: no positive mu, eta can satisfy the budget");
}

PrecisionCheck precision_ok(const PrecisionBudget& budget, double lambda_max, double eta_i,
                            double mu_i) {
  PrecisionCheck c;
  c.lhs = budget.beta(budget.epsilon, budget.tau) + lambda_max * eta_i + 0.5 * lambda_max * mu_i;
  c.margin = budget.epsilon - c.lhs;
  c.ok = c.lhs <= budget.epsilon;
  return c;
}

PrecisionCheck precision_ok_geometric(const PrecisionBudget& budget, double lambda_max, double eta0,
                                      double mu0, double omega_in, double omega_out, int p, int i) {
  if (p < 0 || p > i) throw PreconditionError("precision_ok_geometric needs 0 <= p <= i");
  const double factor = std::pow(omega_in, p) * std::pow(omega_out, i - p);
  PrecisionCheck c;
  c.lhs = budget.beta(budget.epsilon, budget.tau) +
          factor * (lambda_max * eta0 + lambda_max * mu0 / 2.0);
  c.margin = budget.epsilon - c.lhs;
  c.ok = c.lhs <= budget.epsilon;
  return c;
}

std::size_t AbstractSystem::num_transitions() const {
  std::size_t n = 0;
  for (const auto& t : transitions) n += t.size();
  return n;
}

std::optional<std::size_t> AbstractSystem::successor(std::size_t state, std::size_t input) const {
  const auto& row = transitions.at(state);
  auto it = std::lower_bound(row.begin(), row.end(), input,
                             [](const Transition& t, std::size_t u) { return t.input < u; });
  if (it == row.end() || it->input != input) return std::nullopt;
  return it->successor;
}

std::vector<std::size_t> AbstractSystem::enabled_inputs(std::size_t state) const {
  std::vector<std::size_t> out;
  for (const Transition& t : transitions.at(state)) out.push_back(t.input);
  return out;
}

std::optional<std::size_t> AbstractSystem::find_state(int region_id, std::span<const int> k) const {
  auto it = state_index_.find({region_id, std::vector<int>(k.begin(), k.end())});
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AbstractSystem::find_input(std::span<const double> u) const {
  auto it = input_index_.find(Vec(u.begin(), u.end()));
  if (it == input_index_.end()) return std::nullopt;
  return it->second;
}

const Region& AbstractSystem::region(int id) const { return regions.at(region_index_.at(id)); }

void AbstractSystem::reindex() {
  state_index_.clear();
  input_index_.clear();
  region_index_.clear();
  for (std::size_t i = 0; i < states.size(); ++i) state_index_[{states[i].region_id, states[i].k}] = i;
  for (std::size_t i = 0; i < inputs.size(); ++i) input_index_[inputs[i]] = i;
  for (std::size_t i = 0; i < regions.size(); ++i) region_index_[regions[i].id] = i;
  transitions.resize(states.size());
}

std::optional<std::size_t> owning_region(const std::vector<Region>& regions,
                                         std::span<const double> x) {
  for (std::size_t i = regions.size(); i-- > 0;)
    if (regions[i].box.contains(x, 1e-12)) return i;
  return std::nullopt;
}

namespace {

// Coordinates rounded to 1e-12, identifying coinciding lattice points of
// different regions.
using CoordKey = std::vector<long long>;

CoordKey coord_key(std::span<const double> x) {
  CoordKey k(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::llround(x[i] * 1e12);
  return k;
}

}  // namespace

AbstractSystem build_abstraction(const SampledSystem& sys, const std::vector<Region>& regions,
                                 const ZoomQuantizer& qz, const PrecisionBudget& budget,
                                 const BuildOptions& options) {
  if (regions.empty()) throw PreconditionError("build_abstraction: no regions");
  budget.validate();
  for (const Region& r : regions) {
    const PrecisionCheck c = precision_ok(budget, qz.lambda_max(), r.eta, r.mu);
    if (!c.ok) {
      std::ostringstream os;
      os << "region " << r.id << " breaks the precision budget: margin " << c.margin;
      throw PrecisionBreachError(os.str());
    }
  }

  AbstractSystem abs;
  abs.state_dim = sys.state_dim();
  abs.input_dim = sys.input_dim();
  abs.tau = sys.tau();
  abs.epsilon = budget.epsilon;
  abs.quantizer = qz.with_mu(1.0);
  abs.regions = regions;

  // States; with dedup the younger region takes over a shared point and the
  // older (region, k) name resolves to the merged state.
  std::map<CoordKey, std::size_t> by_coords;
  std::map<std::pair<int, std::vector<int>>, std::size_t> by_name;
  for (const Region& r : regions) {
    for (LatticePoint& p : lattice_points(r, qz)) {
      CoordKey key = coord_key(p.coords);
      auto it = by_coords.find(key);
      if (options.dedup_overlaps && it != by_coords.end()) {
        by_name[{p.region_id, p.k}] = it->second;
        abs.states[it->second] = std::move(p);
        continue;
      }
      by_coords[key] = abs.states.size();
      by_name[{p.region_id, p.k}] = abs.states.size();
      abs.states.push_back(std::move(p));
    }
  }
  for (std::size_t s = 0; s < abs.states.size(); ++s)
    if (abs.states[s].region_id == regions.front().id) abs.initial.push_back(s);

  std::map<int, std::size_t> region_pos;
  for (std::size_t i = 0; i < regions.size(); ++i) region_pos[regions[i].id] = i;

  // U2 as the union of the per-state menus; endpoints are kept for reuse.
  std::map<int, InputLattice> lattices;
  std::vector<std::map<Vec, Vec>> endpoints(abs.states.size());
  std::set<Vec> u2;
  for (std::size_t s = 0; s < abs.states.size(); ++s) {
    const LatticePoint& q = abs.states[s];
    const Region& r = regions[region_pos.at(q.region_id)];
    auto lit = lattices.find(r.id);
    if (lit == lattices.end())
      lit = lattices.emplace(r.id, input_lattice(r, sys.system().input_box)).first;
    const ReachCloud cloud = reach_cloud(sys, q, lit->second, r);
    const InputMenu menu = build_menu(cloud, r, qz);
    for (const Vec& u : menu.inputs()) u2.insert(u);
    for (const ReachSample& smp : cloud.samples) endpoints[s].emplace(smp.input, smp.endpoint);
  }
  abs.inputs.assign(u2.begin(), u2.end());

  abs.transitions.assign(abs.states.size(), {});
  for (std::size_t s = 0; s < abs.states.size(); ++s) {
    for (std::size_t j = 0; j < abs.inputs.size(); ++j) {
      const Vec& u = abs.inputs[j];
      auto cached = endpoints[s].find(u);
      const Vec x = cached != endpoints[s].end() ? cached->second
                                                 : integrate(sys, abs.states[s].coords, u);
      const auto owner = owning_region(regions, x);
      if (!owner) continue;
      const Region& r = regions[*owner];
      auto hit = by_name.find({r.id, zoom_indices(qz.with_mu(r.mu), x)});
      if (hit == by_name.end()) continue;
      abs.transitions[s].push_back({j, hit->second});
    }
  }
  abs.reindex();
  return abs;
}

ComplexityReport complexity_report(const AbstractSystem& abs, const Box& full_box) {
  ComplexityReport rep;
  double min_mu = std::numeric_limits<double>::infinity();
  for (const Region& r : abs.regions) min_mu = std::min(min_mu, r.mu);
  rep.uniform_baseline = lattice_count(full_box, abs.quantizer.with_mu(min_mu));
  const double full_volume = full_box.volume();
  for (const Region& r : abs.regions) {
    RegionComplexity rc;
    rc.region_id = r.id;
    rc.states = static_cast<std::size_t>(
        std::count_if(abs.states.begin(), abs.states.end(),
                      [&](const LatticePoint& p) { return p.region_id == r.id; }));
    rc.theta = full_volume > 0.0 ? r.box.volume() / full_volume * rep.uniform_baseline : 0.0;
    rep.total_states += rc.states;
    rep.per_region.push_back(rc);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_doubles(std::ostream& os, std::span<const double> v) {
  for (double d : v) os << ' ' << d;
}

void put_state(std::ostream& os, const LatticePoint& p) {
  os << p.region_id << ':';
  for (std::size_t l = 0; l < p.k.size(); ++l) os << (l ? "," : "") << p.k[l];
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::istringstream next(const std::string& keyword) {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string head;
      ls >> head;
      if (head != keyword) fail("expected '" + keyword + "', got '" + head + "'");
      return ls;
    }
    fail("unexpected end of input, expected '" + keyword + "'");
  }

  std::string raw() {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      if (!line.empty() && line[0] != '#') return line;
    }
    fail("unexpected end of input");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("abstraction line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::istream& is_;
  std::size_t lineno_ = 0;
};

template <class T>
T take(std::istream& ls, const LineReader& rd, const char* what) {
  T v{};
  if (!(ls >> v)) rd.fail(std::string("missing or malformed ") + what);
  return v;
}

Vec take_vec(std::istream& ls, const LineReader& rd, std::size_t n, const char* what) {
  Vec v(n);
  for (double& d : v) d = take<double>(ls, rd, what);
  return v;
}

void expect_word(std::istream& ls, const LineReader& rd, const std::string& w) {
  std::string got;
  if (!(ls >> got) || got != w) rd.fail("expected '" + w + "'");
}

std::pair<int, std::vector<int>> parse_state_ref(const std::string& tok, std::size_t n,
                                                 const LineReader& rd) {
  const auto colon = tok.find(':');
  if (colon == std::string::npos) rd.fail("malformed state reference '" + tok + "'");
  std::pair<int, std::vector<int>> out;
  try {
    out.first = std::stoi(tok.substr(0, colon));
    std::string rest = tok.substr(colon + 1);
    std::istringstream ks(rest);
    std::string part;
    while (std::getline(ks, part, ',')) out.second.push_back(std::stoi(part));
  } catch (const std::exception&) {
    rd.fail("malformed state reference '" + tok + "'");
  }
  if (out.second.size() != n) rd.fail("state reference has wrong dimension");
  return out;
}

}  // namespace

void write_abstraction(std::ostream& os, const AbstractSystem& abs) {
  const auto old_precision = os.precision(17);
  os << "dynq-abstraction 1\n";
  os << "dims " << abs.state_dim << ' ' << abs.input_dim << '\n';
  os << "tau " << abs.tau << '\n';
  os << "epsilon " << abs.epsilon << '\n';
  os << "quantizer " << abs.quantizer.M << ' ' << abs.quantizer.lambda0 << ' '
     << (abs.quantizer.sqrt_n_spacing ? 1 : 0);
  put_doubles(os, abs.quantizer.lambda);
  os << '\n';
  os << "regions " << abs.regions.size() << '\n';
  for (const Region& r : abs.regions) {
    os << "region " << r.id << ' ' << r.mu << ' ' << r.eta << ' ' << r.omega << " lo";
    put_doubles(os, r.box.lo);
    os << " hi";
    put_doubles(os, r.box.hi);
    os << '\n';
  }
  os << "inputs " << abs.inputs.size() << '\n';
  for (std::size_t j = 0; j < abs.inputs.size(); ++j) {
    os << "input " << j;
    put_doubles(os, abs.inputs[j]);
    os << '\n';
  }
  os << "states " << abs.states.size() << '\n';
  for (std::size_t s = 0; s < abs.states.size(); ++s) {
    os << "state " << s << ' ';
    put_state(os, abs.states[s]);
    os << '\n';
  }
  os << "initial " << abs.initial.size();
  for (std::size_t s : abs.initial) os << ' ' << s;
  os << '\n';
  os << "transitions " << abs.num_transitions() << '\n';
  for (std::size_t s = 0; s < abs.states.size(); ++s) {
    for (const auto& t : abs.transitions[s]) {
      put_state(os, abs.states[s]);
      os << ' ' << t.input << ' ';
      put_state(os, abs.states[t.successor]);
      os << '\n';
    }
  }
  os.precision(old_precision);
}

AbstractSystem read_abstraction(std::istream& is) {
  LineReader rd(is);
  AbstractSystem abs;
  {
    auto ls = rd.next("dynq-abstraction");
    if (take<int>(ls, rd, "format version") != 1) rd.fail("unsupported format version");
  }
  {
    auto ls = rd.next("dims");
    abs.state_dim = take<std::size_t>(ls, rd, "state dimension");
    abs.input_dim = take<std::size_t>(ls, rd, "input dimension");
  }
  {
    auto ls = rd.next("tau");
    abs.tau = take<double>(ls, rd, "tau");
  }
  {
    auto ls = rd.next("epsilon");
    abs.epsilon = take<double>(ls, rd, "epsilon");
  }
  const std::size_t n = abs.state_dim, m = abs.input_dim;
  {
    auto ls = rd.next("quantizer");
    abs.quantizer.M = take<int>(ls, rd, "M");
    abs.quantizer.lambda0 = take<double>(ls, rd, "Lambda0");
    abs.quantizer.sqrt_n_spacing = take<int>(ls, rd, "sqrt_n flag") != 0;
    abs.quantizer.lambda = take_vec(ls, rd, n, "Lambda");
    abs.quantizer.mu = 1.0;
    try {
      abs.quantizer.validate();
    } catch (const Error& e) {
      rd.fail(e.what());
    }
  }
  {
    auto ls = rd.next("regions");
    const auto count = take<std::size_t>(ls, rd, "region count");
    for (std::size_t i = 0; i < count; ++i) {
      auto rs = rd.next("region");
      Region r;
      r.id = take<int>(rs, rd, "region id");
      r.mu = take<double>(rs, rd, "mu");
      r.eta = take<double>(rs, rd, "eta");
      r.omega = take<double>(rs, rd, "omega");
      expect_word(rs, rd, "lo");
      Vec lo = take_vec(rs, rd, n, "box lower corner");
      expect_word(rs, rd, "hi");
      Vec hi = take_vec(rs, rd, n, "box upper corner");
      r.box = Box(std::move(lo), std::move(hi));
      abs.regions.push_back(std::move(r));
    }
  }
  std::map<int, double> region_mu;
  for (const Region& r : abs.regions) region_mu[r.id] = r.mu;
  {
    auto ls = rd.next("inputs");
    const auto count = take<std::size_t>(ls, rd, "input count");
    for (std::size_t j = 0; j < count; ++j) {
      auto us = rd.next("input");
      if (take<std::size_t>(us, rd, "input index") != j) rd.fail("inputs out of order");
      abs.inputs.push_back(take_vec(us, rd, m, "input vector"));
    }
  }
  {
    auto ls = rd.next("states");
    const auto count = take<std::size_t>(ls, rd, "state count");
    for (std::size_t s = 0; s < count; ++s) {
      auto ss = rd.next("state");
      if (take<std::size_t>(ss, rd, "state index") != s) rd.fail("states out of order");
      auto [rid, k] = parse_state_ref(take<std::string>(ss, rd, "state"), n, rd);
      auto mu = region_mu.find(rid);
      if (mu == region_mu.end()) rd.fail("state refers to unknown region");
      abs.states.push_back(make_lattice_point(abs.quantizer.with_mu(mu->second), rid, std::move(k)));
    }
  }
  {
    auto ls = rd.next("initial");
    const auto count = take<std::size_t>(ls, rd, "initial count");
    for (std::size_t i = 0; i < count; ++i) {
      const auto s = take<std::size_t>(ls, rd, "initial state");
      if (s >= abs.states.size()) rd.fail("initial state out of range");
      abs.initial.push_back(s);
    }
  }
  abs.reindex();
  {
    auto ls = rd.next("transitions");
    const auto count = take<std::size_t>(ls, rd, "transition count");
    for (std::size_t t = 0; t < count; ++t) {
      std::istringstream ts(rd.raw());
      auto [rid, k] = parse_state_ref(take<std::string>(ts, rd, "source"), n, rd);
      const auto input = take<std::size_t>(ts, rd, "input index");
      auto [srid, sk] = parse_state_ref(take<std::string>(ts, rd, "successor"), n, rd);
      const auto src = abs.find_state(rid, k);
      const auto dst = abs.find_state(srid, sk);
      if (!src || !dst) rd.fail("transition refers to unknown state");
      if (input >= abs.inputs.size()) rd.fail("transition input out of range");
      auto& row = abs.transitions[*src];
      if (!row.empty() && row.back().input >= input) rd.fail("transitions out of order");
      row.push_back({input, *dst});
    }
  }
  return abs;
}

}  // namespace dynq
