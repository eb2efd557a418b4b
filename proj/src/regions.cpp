#include "dynq/regions.hpp"

#include <cmath>

#include "dynq/errors.hpp"

namespace dynq {

void RegionPolicy::validate() const {
  if (!(omega > 0.0 && omega < 1.0)) throw PreconditionError("omega must lie in (0,1)");
  if (!(omega_in > 0.0 && omega_in <= 1.0))
    throw PreconditionError("Omega_in must lie in (0,1] (1 only for the uniform setting)");
  if (!(omega_out >= 1.0)) throw PreconditionError("Omega_out must be at least 1");
  if (!(mu0 > 0.0) || !(eta0 > 0.0)) throw PreconditionError("mu0 and eta0 must be positive");
  for (double h : base_halfwidths)
    if (!(h > 0.0)) throw PreconditionError("base half-widths must be positive");
}

std::string to_string(Zone z) {
  switch (z) {
    case Zone::inside_core: return "inside_core";
    case Zone::boundary_band: return "boundary_band";
    case Zone::outside: return "outside";
  }
  return "?";
}

Box contraction(const Region& r) {
  Box c = r.box;
  for (std::size_t l = 0; l < c.dim(); ++l) {
    c.lo[l] += r.omega;
    c.hi[l] -= r.omega;
    if (c.lo[l] >= c.hi[l])
      throw EmptyContractionError("omega-contraction of region " + std::to_string(r.id) +
                                  " is empty on axis " + std::to_string(l));
  }
  return c;
}

Zone classify(std::span<const double> x, const Region& r) {
  if (!r.box.contains(x)) return Zone::outside;
  return contraction(r).contains(x) ? Zone::inside_core : Zone::boundary_band;
}

EventState update_events(const Region& r, std::span<const Box> obstacles, std::span<const Box> safe,
                         bool a) {
  EventState e;
  e.a = a;
  for (const Box& o : obstacles) e.b = e.b || r.box.intersects(o);
  for (const Box& s : safe) e.c = e.c || r.box.intersects(s);
  return e;
}

namespace {

Box lattice_aligned(std::span<const double> center, std::span<const double> half,
                    const ZoomQuantizer& qz) {
  Vec lo(center.size()), hi(center.size());
  for (std::size_t l = 0; l < center.size(); ++l) {
    const double s = qz.step(l);
    lo[l] = std::round((center[l] - half[l]) / s) * s;
    hi[l] = lo[l] + 2.0 * half[l];
  }
  return Box(std::move(lo), std::move(hi));
}

}  // namespace

Region next_region(std::span<const double> x_new, const Region& r, const EventState& e,
                   const RegionPolicy& policy, const ZoomQuantizer* lattice,
                   const PrecisionGuard& guard) {
  if (classify(x_new, r) != Zone::boundary_band)
    throw PreconditionError("next_region: state " + to_string(x_new) +
                            " is not in the boundary band of region " + std::to_string(r.id));
  const double factor = (e.b || e.c) ? policy.omega_in : policy.omega_out;
  Region next;
  next.id = r.id + 1;
  next.mu = factor * r.mu;
  next.eta = factor * r.eta;
  next.omega = policy.omega;
  if (guard) guard(next.mu, next.eta);

  Vec half(policy.base_halfwidths);
  for (double& h : half) {
    h *= next.mu;
    if (h <= next.omega)
      throw DegenerateRegionError("region half-width " + std::to_string(h) +
                                  " does not exceed omega");
  }

  next.box = Box::centered(x_new, half);
  if (policy.snap_to_lattice && lattice != nullptr) {
    Box snapped = lattice_aligned(x_new, half, lattice->with_mu(next.mu));
    Region probe = next;
    probe.box = snapped;
    if (classify(x_new, probe) == Zone::inside_core) next.box = std::move(snapped);
  }

  if (classify(x_new, next) != Zone::inside_core || !next.box.intersects(r.box))
    throw PreconditionError("next_region: generated box violates the overlap rule");
  return next;
}

Region initial_region(const Box& box, const RegionPolicy& policy) {
  Region r;
  r.id = 0;
  r.box = box;
  r.mu = policy.mu0;
  r.eta = policy.eta0;
  r.omega = policy.omega;
  contraction(r);
  return r;
}

}  // namespace dynq
