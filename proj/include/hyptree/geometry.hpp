#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyptree {

using Vec = Eigen::VectorXd;

/// A point on the hyperboloid H^m_rho, stored in Minkowski coordinates.
/// The time-like coordinate is last: <x,x>_M = -rho^2 and x[m] > 0,
/// where <u,v>_M = sum_{i<m} u_i v_i - u_m v_m.
struct HyperPoint {
  Vec coords;       // m+1 entries
  double rho = 1.0; // hyperboloid radius; sectional curvature -1/rho^2

  int dim() const { return static_cast<int>(coords.size()) - 1; }
};

/// A vector in the tangent space at `base`: <base, vec>_M = 0. The Minkowski
/// form restricted to a tangent space is positive definite, so tangent
/// vectors have an ordinary norm.
struct TangentVector {
  HyperPoint base;
  Vec vec;

  double norm() const;
};

/// A point of the Poincare ball model B^m_rho (Euclidean norm < rho);
/// used for visualisation coordinates only.
struct PoincarePoint {
  Vec coords; // m entries
  double rho = 1.0;
};

inline double minkowski_dot(const Vec& u, const Vec& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("minkowski_dot: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  if (u.size() < 3)
    throw std::invalid_argument("minkowski_dot: need at least 3 coordinates");
  const Eigen::Index m = u.size() - 1;
  return u.head(m).dot(v.head(m)) - u[m] * v[m];
}

inline double TangentVector::norm() const {
  // restriction of the Minkowski form is positive definite; clamp the tiny
  // negative values rounding can produce
  return std::sqrt(std::max(0.0, minkowski_dot(vec, vec)));
}

inline HyperPoint basepoint(int m, double rho) {
  if (m < 2) throw std::invalid_argument("basepoint: dimension must be >= 2");
  if (!(rho > 0.0)) throw std::invalid_argument("basepoint: rho must be positive");
  Vec c = Vec::Zero(m + 1);
  c[m] = rho;
  return HyperPoint{std::move(c), rho};
}

inline bool on_hyperboloid(const HyperPoint& x, double rel_tol = 1e-9) {
  if (x.dim() < 2 || !(x.rho > 0.0)) return false;
  const double form = minkowski_dot(x.coords, x.coords);
  return std::abs(form + x.rho * x.rho) <= rel_tol * x.rho * x.rho &&
         x.coords[x.dim()] > 0.0;
}

inline void require_shared_geometry(const HyperPoint& x, const HyperPoint& y,
                                    const char* who) {
  if (x.coords.size() != y.coords.size() || x.rho != y.rho)
    throw std::invalid_argument(std::string(who) +
                                ": points do not share (m, rho)");
}

/// Geodesic distance rho * arccosh(-<x,y>_M / rho^2). The arccosh argument is
/// clamped to >= 1: cancellation can push it just below 1 for near-coincident
/// points. Identical coordinates short-circuit to 0 so d(x, x) is exact.
inline double hyperbolic_distance(const HyperPoint& x, const HyperPoint& y) {
  require_shared_geometry(x, y, "hyperbolic_distance");
  if (x.coords == y.coords) return 0.0;
  const double arg = -minkowski_dot(x.coords, y.coords) / (x.rho * x.rho);
  return x.rho * std::acosh(std::max(1.0, arg));
}

/// Orthogonal projection of an ambient vector onto the tangent space at x.
inline Vec project_to_tangent(const HyperPoint& x, const Vec& ambient) {
  const double c = minkowski_dot(x.coords, ambient) / (x.rho * x.rho);
  return ambient + c * x.coords;
}

namespace detail {
inline void require_tangent(const HyperPoint& x, const Vec& v, const char* who) {
  if (v.size() != x.coords.size())
    throw std::invalid_argument(std::string(who) + ": tangent dimension mismatch");
  const double tol = 1e-8 * x.coords.norm() * v.norm() + 1e-12;
  if (std::abs(minkowski_dot(x.coords, v)) > tol)
    throw std::invalid_argument(std::string(who) + ": vector is not tangent at base");
}
}  // namespace detail

/// Exponential map: the point at distance ||v|| from `base` along the
/// geodesic in direction v. The result is re-projected onto the hyperboloid
/// (recompute the last coordinate from the spatial ones) so that drift does
/// not accumulate over long optimisations.
inline HyperPoint exp_map(const HyperPoint& base, const Vec& v) {
  detail::require_tangent(base, v, "exp_map");
  const double n = std::sqrt(std::max(0.0, minkowski_dot(v, v)));
  if (n == 0.0) return base;
  const double rho = base.rho;
  Vec y = std::cosh(n / rho) * base.coords + (rho * std::sinh(n / rho) / n) * v;
  const Eigen::Index m = y.size() - 1;
  y[m] = std::sqrt(rho * rho + y.head(m).squaredNorm());
  return HyperPoint{std::move(y), rho};
}

inline HyperPoint exp_map(const HyperPoint& base, const TangentVector& v) {
  return exp_map(base, v.vec);
}

/// Logarithm map, the inverse of exp_map: returns the tangent vector at
/// `base` with ||Log_base(y)|| = d(base, y) pointing toward y.
inline TangentVector log_map(const HyperPoint& base, const HyperPoint& y) {
  require_shared_geometry(base, y, "log_map");
  const double rho = base.rho;
  const double mxy = minkowski_dot(base.coords, y.coords);
  const double arg = -mxy / (rho * rho);
  if (arg <= 1.0) return TangentVector{base, Vec::Zero(base.coords.size())};
  const double d = rho * std::acosh(arg);
  // tangent projection of y at base; its norm equals the denominator below
  Vec dir = y.coords + (mxy / (rho * rho)) * base.coords;
  const double denom = std::sqrt((mxy / rho) * (mxy / rho) - rho * rho);
  return TangentVector{base, (d / denom) * dir};
}

/// Riemannian gradient at x of the distance-to-y function. Unit norm away
/// from y; equals -log_map(x, y) / ||log_map(x, y)||. For coincident points
/// the distance is not differentiable and the zero vector is returned (the
/// zero norm is the degeneracy flag; the gradient has unit norm otherwise).
inline TangentVector distance_gradient(const HyperPoint& x, const HyperPoint& y) {
  require_shared_geometry(x, y, "distance_gradient");
  const double rho = x.rho;
  const double mxy = minkowski_dot(x.coords, y.coords);
  const double arg = -mxy / (rho * rho);
  if (arg <= 1.0) return TangentVector{x, Vec::Zero(x.coords.size())};
  const double denom = std::sqrt((mxy / rho) * (mxy / rho) - rho * rho);
  Vec g = -(y.coords + (mxy / (rho * rho)) * x.coords) / denom;
  return TangentVector{x, std::move(g)};
}

/// Hyperboloid -> Poincare ball: x |-> rho/(x_{m+1} + rho) * (x_1..x_m).
inline PoincarePoint to_poincare(const HyperPoint& x) {
  const Eigen::Index m = x.coords.size() - 1;
  const double f = x.rho / (x.coords[m] + x.rho);
  return PoincarePoint{f * x.coords.head(m), x.rho};
}

/// Poincare ball -> hyperboloid (inverse of to_poincare). With s = r^2/rho^2:
/// spatial part 2/(1-s) * y, last coordinate rho (1+s)/(1-s).
inline HyperPoint from_poincare(const PoincarePoint& y) {
  const double rho = y.rho;
  const double r2 = y.coords.squaredNorm();
  if (!(r2 < rho * rho))
    throw std::domain_error("from_poincare: point not inside the ball of radius rho");
  const double s = r2 / (rho * rho);
  Vec c(y.coords.size() + 1);
  c.head(y.coords.size()) = (2.0 / (1.0 - s)) * y.coords;
  c[y.coords.size()] = rho * (1.0 + s) / (1.0 - s);
  return HyperPoint{std::move(c), rho};
}

}  // namespace hyptree
