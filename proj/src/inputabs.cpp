#include "dynq/inputabs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dynq/errors.hpp"
#include "dynq/quantization.hpp"

namespace dynq {

std::vector<Vec> input_grid(const Box& U, double pitch) {
  if (!(pitch > 0.0)) throw PreconditionError("input grid pitch must be positive");
  const std::size_t m = U.dim();
  std::vector<std::vector<double>> axes(m);
  for (std::size_t l = 0; l < m; ++l) {
    auto [first, last] = axis_index_range(U.lo[l], U.hi[l], pitch);
    if (first > last) {
      // Pitch wider than the box and 0 not inside: keep the nearest face.
      axes[l].push_back(std::abs(U.lo[l]) < std::abs(U.hi[l]) ? U.lo[l] : U.hi[l]);
      continue;
    }
    for (long k = first; k <= last; ++k)
      axes[l].push_back(std::clamp(k * pitch, U.lo[l], U.hi[l]));
  }
  std::vector<Vec> out;
  std::vector<std::size_t> idx(m, 0);
  while (true) {
    Vec u(m);
    for (std::size_t l = 0; l < m; ++l) u[l] = axes[l][idx[l]];
    out.push_back(std::move(u));
    std::size_t l = m;
    while (l > 0) {
      --l;
      if (++idx[l] < axes[l].size()) break;
      idx[l] = 0;
      if (l == 0) return out;
    }
  }
}

InputLattice input_lattice(const Region& region, const Box& U) {
  if (!(region.eta > 0.0)) throw PreconditionError("input lattice needs eta > 0");
  InputLattice lat;
  lat.region_id = region.id;
  lat.spacing = region.eta;
  lat.points = input_grid(U, region.eta);
  return lat;
}

ReachCloud reach_cloud(const SampledSystem& sys, const LatticePoint& q, const InputLattice& lat,
                       const Region& region) {
  if (!region.box.contains(q.coords, 1e-9))
    throw PreconditionError("reach_cloud: source state outside its region");
  ReachCloud cloud;
  cloud.source = q;
  cloud.tau = sys.tau();
  cloud.input_spacing = lat.spacing;
  const Box band = region.box.inflated(region.omega);
  cloud.samples.reserve(lat.points.size());
  for (const Vec& u : lat.points) {
    ReachSample s;
    s.input = u;
    s.endpoint = integrate(sys, q.coords, u);
    s.escapes = !band.contains(s.endpoint);
    cloud.samples.push_back(std::move(s));
  }
  return cloud;
}

std::vector<Vec> InputMenu::inputs() const {
  std::set<Vec> uniq;
  for (const MenuEntry& e : entries) uniq.insert(e.input);
  return {uniq.begin(), uniq.end()};
}

InputMenu build_menu(const ReachCloud& cloud, const Region& region, const ZoomQuantizer& qz) {
  if (cloud.samples.empty()) throw PreconditionError("build_menu: empty reach cloud");
  const std::size_t n = region.box.dim();
  const ZoomQuantizer eta_grid = qz.with_mu(region.eta);
  InputMenu menu;
  menu.source = cloud.source;
  menu.eta = region.eta;
  menu.radius = qz.lambda_max() * region.eta / 2.0;
  menu.input_spacing = cloud.input_spacing;
  const double tol = 1e-12 * std::max(1.0, menu.radius);

  struct Best {
    double distance;
    std::size_t sample;
  };
  std::map<std::vector<int>, Best> chosen;

  std::vector<std::vector<int>> candidates(n);
  for (std::size_t s = 0; s < cloud.samples.size(); ++s) {
    const Vec& e = cloud.samples[s].endpoint;
    bool any = true;
    for (std::size_t l = 0; l < n && any; ++l) {
      candidates[l].clear();
      const double step = eta_grid.step(l);
      const long base = static_cast<long>(std::floor(e[l] / step));
      const long reach = static_cast<long>(std::ceil(menu.radius / step));
      for (long k = base - reach; k <= base + reach + 1; ++k) {
        const double y = k * step;
        if (std::abs(y - e[l]) <= menu.radius + tol && y >= region.box.lo[l] - 1e-9 &&
            y <= region.box.hi[l] + 1e-9)
          candidates[l].push_back(static_cast<int>(k));
      }
      any = !candidates[l].empty();
    }
    if (!any) continue;

    std::vector<std::size_t> idx(n, 0);
    std::vector<int> k(n);
    while (true) {
      for (std::size_t l = 0; l < n; ++l) k[l] = candidates[l][idx[l]];
      Vec y(n);
      for (std::size_t l = 0; l < n; ++l) y[l] = k[l] * eta_grid.step(l);
      const double d = inf_dist(y, e);
      auto it = chosen.find(k);
      if (it == chosen.end()) {
        chosen.emplace(k, Best{d, s});
      } else if (d < it->second.distance ||
                 (d == it->second.distance &&
                  cloud.samples[s].input < cloud.samples[it->second.sample].input)) {
        it->second = Best{d, s};
      }
      std::size_t l = n;
      bool done = false;
      while (l > 0) {
        --l;
        if (++idx[l] < candidates[l].size()) break;
        idx[l] = 0;
        if (l == 0) done = true;
      }
      if (done) break;
    }
  }

  if (chosen.empty())
    throw EmptyMenuError("no eta-lattice point of region " + std::to_string(region.id) +
                         " lies within " + std::to_string(menu.radius) + " of the reach set");

  menu.entries.reserve(chosen.size());
  for (const auto& [k, best] : chosen) {
    MenuEntry e;
    e.target_k = k;
    e.target.resize(n);
    for (std::size_t l = 0; l < n; ++l) e.target[l] = k[l] * eta_grid.step(l);
    e.input = cloud.samples[best.sample].input;
    e.endpoint = cloud.samples[best.sample].endpoint;
    e.distance = best.distance;
    if (e.distance > menu.radius + tol)
      throw PreconditionError("build_menu: selector contract broken");
    menu.entries.push_back(std::move(e));
  }
  return menu;
}

InputCoverReport verify_input_cover(const SampledSystem& sys, const LatticePoint& q,
                                    const Region& region, const InputMenu& menu,
                                    const ZoomQuantizer& qz, int dense_factor) {
  if (dense_factor < 2) throw PreconditionError("verify_input_cover: dense_factor must be >= 2");
  (void)region;
  InputCoverReport rep;
  rep.bound = qz.lambda_max() * menu.eta;
  const auto dense = input_grid(sys.system().input_box, menu.input_spacing / dense_factor);
  std::vector<Vec> menu_endpoints;
  for (const Vec& u : menu.inputs()) menu_endpoints.push_back(integrate(sys, q.coords, u));
  for (const Vec& u : dense) {
    const Vec x = integrate(sys, q.coords, u);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& y : menu_endpoints) best = std::min(best, inf_dist(x, y));
    rep.max_gap = std::max(rep.max_gap, best);
  }
  rep.samples = dense.size();
  rep.violated = rep.max_gap > rep.bound + 1e-12;
  return rep;
}

}  // namespace dynq
