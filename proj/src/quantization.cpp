#include "dynq/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dynq/errors.hpp"

namespace dynq {

namespace {
// Relative slack when deciding whether a box face sits on a lattice node.
constexpr double kNodeTol = 1e-9;
}  // namespace

ZoomQuantizer::ZoomQuantizer(int M_, Vec lambda_, double lambda0_, double mu_)
    : M(M_), lambda(std::move(lambda_)), lambda0(lambda0_), mu(mu_) {
  validate();
}

void ZoomQuantizer::validate() const {
  if (M < 1) throw PreconditionError("quantizer range M must be positive");
  if (lambda.empty()) throw PreconditionError("quantizer needs at least one axis");
  const auto [mn, mx] = std::minmax_element(lambda.begin(), lambda.end());
  if (!(*mn > 0.0)) throw PreconditionError("quantizer granularity must be positive");
  if (!(M * *mn > *mx)) throw PreconditionError("quantizer requires M*min(Lambda) > max(Lambda)");
  if (lambda0 < 0.0) throw PreconditionError("dead-zone radius must be nonnegative");
  if (!(mu > 0.0)) throw PreconditionError("zoom parameter must be positive");
}

double ZoomQuantizer::step(std::size_t axis) const {
  const double s = lambda[axis] * mu;
  return sqrt_n_spacing ? s / std::sqrt(static_cast<double>(lambda.size())) : s;
}

double ZoomQuantizer::lambda_max() const { return *std::max_element(lambda.begin(), lambda.end()); }

ZoomQuantizer ZoomQuantizer::with_mu(double new_mu) const {
  ZoomQuantizer q = *this;
  q.mu = new_mu;
  if (!(new_mu > 0.0)) throw PreconditionError("zoom parameter must be positive");
  return q;
}

int zoom_index(const ZoomQuantizer& qz, std::size_t axis, double z) {
  const double s = qz.step(axis);
  const int M = qz.M;
  if (z >= (M + 0.5) * s) return M;
  if (z < -(M + 0.5) * s) return -M;
  // Half-open cells [(k-0.5)s, (k+0.5)s); the guess is corrected with the
  // same comparisons the cell definition uses.
  long k = static_cast<long>(std::floor(z / s + 0.5));
  if (z >= (k + 0.5) * s) ++k;
  if (z < (k - 0.5) * s) --k;
  return static_cast<int>(std::clamp<long>(k, -M, M));
}

double zoom_quantize_scalar(const ZoomQuantizer& qz, std::size_t axis, double z) {
  return zoom_index(qz, axis, z) * qz.step(axis);
}

std::vector<int> zoom_indices(const ZoomQuantizer& qz, std::span<const double> z) {
  std::vector<int> k(z.size(), 0);
  double dead = 0.0;
  for (double v : z) dead = std::max(dead, std::abs(v));
  if (dead <= qz.lambda0 * qz.mu) return k;
  for (std::size_t l = 0; l < z.size(); ++l) k[l] = zoom_index(qz, l, z[l]);
  return k;
}

Vec zoom_quantize(const ZoomQuantizer& qz, std::span<const double> z) {
  const auto k = zoom_indices(qz, z);
  Vec out(z.size());
  for (std::size_t l = 0; l < z.size(); ++l) out[l] = k[l] * qz.step(l);
  return out;
}

LatticePoint make_lattice_point(const ZoomQuantizer& qz, int region_id, std::vector<int> k) {
  LatticePoint p;
  p.region_id = region_id;
  p.coords.resize(k.size());
  for (std::size_t l = 0; l < k.size(); ++l) p.coords[l] = k[l] * qz.step(l);
  p.k = std::move(k);
  return p;
}

std::pair<long, long> axis_index_range(double lo, double hi, double step) {
  const long first = static_cast<long>(std::ceil(lo / step - kNodeTol));
  const long last = static_cast<long>(std::floor(hi / step + kNodeTol));
  return {first, last};
}

std::vector<LatticePoint> lattice_points(const Box& box, int region_id, const ZoomQuantizer& qz) {
  if (box.empty()) throw PreconditionError("lattice_points: empty box");
  if (box.dim() != qz.dim()) throw PreconditionError("lattice_points: dimension mismatch");
  const std::size_t n = box.dim();
  std::vector<std::pair<long, long>> ranges(n);
  for (std::size_t l = 0; l < n; ++l) {
    ranges[l] = axis_index_range(box.lo[l], box.hi[l], qz.step(l));
    if (ranges[l].first > ranges[l].second) return {};
    if (ranges[l].first < -qz.M || ranges[l].second > qz.M)
      throw RangeExceededError("box " + to_string(box) + " needs lattice index beyond M=" +
                               std::to_string(qz.M) + " on axis " + std::to_string(l));
  }
  std::vector<LatticePoint> out;
  std::vector<int> k(n);
  for (std::size_t l = 0; l < n; ++l) k[l] = static_cast<int>(ranges[l].first);
  // Odometer over the index box; the last axis varies fastest.
  while (true) {
    out.push_back(make_lattice_point(qz, region_id, k));
    std::size_t l = n;
    while (l > 0) {
      --l;
      if (k[l] < ranges[l].second) {
        ++k[l];
        break;
      }
      k[l] = static_cast<int>(ranges[l].first);
      if (l == 0) return out;
    }
  }
}

std::vector<LatticePoint> lattice_points(const Region& region, const ZoomQuantizer& qz) {
  return lattice_points(region.box, region.id, qz.with_mu(region.mu));
}

std::size_t lattice_count(const Box& box, const ZoomQuantizer& qz) {
  std::size_t count = 1;
  for (std::size_t l = 0; l < box.dim(); ++l) {
    const auto [first, last] = axis_index_range(box.lo[l], box.hi[l], qz.step(l));
    if (first > last) return 0;
    count *= static_cast<std::size_t>(last - first + 1);
  }
  return count;
}

bool cover_check(const Box& box, std::span<const LatticePoint> pts, double radius) {
  if (pts.empty()) return box.empty();
  const std::size_t n = box.dim();
  const double pitch = radius / 4.0;
  std::vector<Vec> axes(n);
  for (std::size_t l = 0; l < n; ++l) {
    for (double v = box.lo[l]; v < box.hi[l]; v += pitch) axes[l].push_back(v);
    axes[l].push_back(box.hi[l]);
  }
  std::vector<std::size_t> idx(n, 0);
  Vec vertex(n);
  while (true) {
    for (std::size_t l = 0; l < n; ++l) vertex[l] = axes[l][idx[l]];
    const bool covered = std::any_of(pts.begin(), pts.end(), [&](const LatticePoint& p) {
      return inf_dist(vertex, p.coords) <= radius + 1e-12;
    });
    if (!covered) return false;
    std::size_t l = n;
    while (l > 0) {
      --l;
      if (++idx[l] < axes[l].size()) break;
      idx[l] = 0;
      if (l == 0) return true;
    }
  }
}

}  // namespace dynq
