#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dynq {

using Vec = std::vector<double>;

/// Infinity norm; every distance in the library uses it.
double inf_norm(std::span<const double> x);
double inf_dist(std::span<const double> a, std::span<const double> b);

/// Closed axis-aligned box [lo_1,hi_1] x ... x [lo_n,hi_n].
///
/// Boxes describing obstacles and targets may have fewer axes than the
/// state; they then constrain only the leading coordinates and the
/// remaining ones are unconstrained.
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec lo_, Vec hi_);

  static Box centered(std::span<const double> center, std::span<const double> halfwidths);

  std::size_t dim() const { return lo.size(); }
  bool empty() const;
  Vec center() const;
  Vec halfwidths() const;
  double width(std::size_t axis) const { return hi[axis] - lo[axis]; }
  double volume() const;

  /// Closed membership over the shared leading axes, with absolute slack `tol`.
  bool contains(std::span<const double> x, double tol = 0.0) const;
  /// Closed-set overlap over the shared leading axes (face contact counts).
  bool intersects(const Box& other) const;
  Box inflated(double margin) const;

  friend bool operator==(const Box&, const Box&) = default;
};

std::string to_string(const Box& b);
std::string to_string(std::span<const double> v);

}  // namespace dynq
