#pragma once

#include <cmath>

#include "hyptree/geometry.hpp"
#include "hyptree/rng.hpp"
#include "hyptree/tree.hpp"

namespace testutil {

using hyptree::HyperPoint;
using hyptree::Rng;
using hyptree::Vec;

/// Random point within geodesic distance `radius` of the basepoint.
inline HyperPoint random_point(Rng& rng, int m, double rho, double radius) {
  const HyperPoint b = hyptree::basepoint(m, rho);
  Vec dir = Vec::Zero(m + 1);
  for (int i = 0; i < m; ++i) dir[i] = rng.gaussian();
  dir /= dir.head(m).norm();
  return hyptree::exp_map(b, (radius * rng.uniform()) * dir);
}

/// Random unit tangent vector at x.
inline Vec random_tangent(Rng& rng, const HyperPoint& x) {
  Vec g(x.coords.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.gaussian();
  Vec v = hyptree::project_to_tangent(x, g);
  return v / std::sqrt(hyptree::minkowski_dot(v, v));
}

/// Poincare-ball distance, the independent cross-model oracle:
/// rho * arccosh(1 + 2 rho^2 |x-y|^2 / ((rho^2-|x|^2)(rho^2-|y|^2))).
inline double poincare_distance(const hyptree::PoincarePoint& x,
                                const hyptree::PoincarePoint& y) {
  const double rho2 = x.rho * x.rho;
  const double num = 2.0 * rho2 * (x.coords - y.coords).squaredNorm();
  const double den = (rho2 - x.coords.squaredNorm()) * (rho2 - y.coords.squaredNorm());
  return x.rho * std::acosh(1.0 + num / den);
}

/// The balanced 8-leaf tree with every edge of length eps, leaves "1".."8".
inline hyptree::Tree balanced8(double eps = 0.25) {
  auto fmt = [&](const char* pattern) {
    std::string s = pattern;
    std::string e = std::to_string(eps);
    std::string out;
    for (char c : s)
      if (c == 'E') out += e; else out += c;
    return out;
  };
  return hyptree::parse_newick(
      fmt("(((1:E,2:E):E,(3:E,4:E):E):E,((5:E,6:E):E,(7:E,8:E):E):E);"));
}

/// Edge lengths snapped to multiples of 1/256 keep every path sum exact in
/// double arithmetic, so tree-metric identities hold bit-for-bit.
inline hyptree::Tree dyadic_lengths(const hyptree::Tree& t, Rng& rng,
                                    double lo = 0.05, double hi = 0.2) {
  hyptree::Tree out = t;
  for (int v = 0; v < out.n_nodes(); ++v) {
    if (v == out.root) continue;
    const double raw = rng.uniform(lo, hi);
    out.nodes[v].length = std::round(raw * 256.0) / 256.0;
  }
  return out;
}

}  // namespace testutil
