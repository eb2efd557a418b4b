#include "dynq/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynq/errors.hpp"

namespace dynq {

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double inf_dist(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw PreconditionError("box bounds differ in dimension");
}

Box Box::centered(std::span<const double> center, std::span<const double> halfwidths) {
  Vec lo(center.size()), hi(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    lo[i] = center[i] - halfwidths[i];
    hi[i] = center[i] + halfwidths[i];
  }
  return Box(std::move(lo), std::move(hi));
}

bool Box::empty() const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) return true;
  return false;
}

Vec Box::center() const {
  Vec c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

Vec Box::halfwidths() const {
  Vec h(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) h[i] = 0.5 * (hi[i] - lo[i]);
  return h;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

bool Box::contains(std::span<const double> x, double tol) const {
  const std::size_t n = std::min(x.size(), lo.size());
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  return true;
}

bool Box::intersects(const Box& other) const {
  const std::size_t n = std::min(dim(), other.dim());
  for (std::size_t i = 0; i < n; ++i)
    if (hi[i] < other.lo[i] || other.hi[i] < lo[i]) return false;
  return true;
}

Box Box::inflated(double margin) const {
  Box b = *this;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    b.lo[i] -= margin;
    b.hi[i] += margin;
  }
  return b;
}

std::string to_string(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

std::string to_string(const Box& b) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < b.dim(); ++i)
    os << (i ? "x" : "") << '[' << b.lo[i] << ',' << b.hi[i] << ']';
  return os.str();
}

}  // namespace dynq
