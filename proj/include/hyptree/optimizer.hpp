#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyptree/alignment.hpp"
#include "hyptree/branch_optimize.hpp"
#include "hyptree/configuration.hpp"
#include "hyptree/jukes_cantor.hpp"
#include "hyptree/neighbor_joining.hpp"
#include "hyptree/tree.hpp"

namespace hyptree {

struct OptimizerSettings {
  double learning_rate = 0.1;
  double max_step = 0.05;
  double convergence_threshold = 5e-5;
  int max_iterations = 10000;
  int trace_every = 10;
};

inline void validate_settings(const OptimizerSettings& s) {
  if (!(s.learning_rate > 0.0) || !(s.max_step > 0.0) ||
      !(s.convergence_threshold > 0.0) || s.max_iterations < 1 || s.trace_every < 1)
    throw std::invalid_argument("optimizer settings: all fields must be positive");
  if (s.max_step < s.convergence_threshold)
    throw std::invalid_argument("optimizer settings: max_step below convergence threshold");
}

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  double max_step_taken = 0.0;
  std::optional<int> rf_to_reference;
  std::optional<double> tree_loglik;
};

struct optimizer_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The pairwise log-likelihood objective of Eq.-style form
///   (1/L) sum_{i != j} log Lik_ij(d(x_i, x_j)) =
///   sum_{i != j} [ (1-r_ij) log p_same(d_ij) + r_ij log p_diff(d_ij) ],
/// the 1/L scale cancelling the per-pair factor L. Both orders of every pair
/// are counted. -inf exactly when some pair with r > 0 sits at distance 0.
inline double objective(const PointConfiguration& config, const DiffRateMatrix& stats) {
  const int n = config.size();
  if (n != stats.n) throw std::domain_error("objective: configuration/stats size mismatch");
  if (n < 2) throw std::domain_error("objective: need at least 2 points");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = hyperbolic_distance(config.points[i], config.points[j]);
      const double r = stats.rates(i, j);
      double term = (1.0 - r) * std::log(jc_p_same(d));
      if (r > 0.0) term += r * std::log(jc_p_diff(d));
      total += 2.0 * term;
    }
  }
  return total;
}

namespace detail {

/// Gradient accumulation for one point, written into `g` (pre-sized by the
/// caller; no allocations on this path). Pairs at distance exactly 0
/// contribute nothing (the distance is not differentiable there); if such a
/// pair has r > 0 its index is reported through `collision_j` so the caller
/// can resolve the -inf objective.
inline void point_gradient_impl(const PointConfiguration& config,
                                const DiffRateMatrix& stats, int i, Vec& g,
                                int* collision_j) {
  const HyperPoint& xi = config.points[i];
  const double rho = xi.rho;
  const double rho2 = rho * rho;
  if (collision_j) *collision_j = -1;
  g.setZero();
  for (int j = 0; j < config.size(); ++j) {
    if (j == i) continue;
    const HyperPoint& xj = config.points[j];
    const double mxy = minkowski_dot(xi.coords, xj.coords);
    const double arg = -mxy / rho2;
    const double r = stats.rates(i, j);
    if (arg <= 1.0) {
      if (r > 0.0 && collision_j && *collision_j < 0) *collision_j = j;
      continue;
    }
    const double d = rho * std::acosh(arg);
    const double decay = std::exp(-4.0 * d / 3.0);
    const double p = 0.25 + 0.75 * decay;
    const double q = 0.25 - 0.25 * decay;
    // ordered-pair sum: each unordered pair appears twice in the objective
    const double w = 2.0 * decay * (r / (3.0 * q) - (1.0 - r) / p);
    if (!std::isfinite(w))
      throw optimizer_error("non-finite gradient weight for pair (" +
                            config.labels[i] + ", " + config.labels[j] + ")");
    const double denom = std::sqrt((mxy / rho) * (mxy / rho) - rho2);
    // gradient of d(., x_j) at x_i is -(x_j + rho^-2 <x_i,x_j> x_i)/denom
    const double cx = -w * (mxy / rho2) / denom;
    const double cy = -w / denom;
    g.noalias() += cx * xi.coords;
    g.noalias() += cy * xj.coords;
  }
  const double proj = minkowski_dot(xi.coords, g) / rho2;
  g.noalias() += proj * xi.coords;
}

inline Vec deterministic_tangent(const HyperPoint& x) {
  for (Eigen::Index k = 0; k < x.coords.size(); ++k) {
    Vec e = Vec::Zero(x.coords.size());
    e[k] = 1.0;
    Vec v = project_to_tangent(x, e);
    const double n = std::sqrt(std::max(0.0, minkowski_dot(v, v)));
    if (n > 1e-9) return v / n;
  }
  throw optimizer_error("could not construct a tangent direction");
}

}  // namespace detail

/// Riemannian gradient of the objective with respect to point i, all other
/// points held fixed.
inline TangentVector point_gradient(const PointConfiguration& config,
                                    const DiffRateMatrix& stats, int i) {
  if (i < 0 || i >= config.size())
    throw std::domain_error("point_gradient: index out of range");
  if (config.size() != stats.n)
    throw std::domain_error("point_gradient: configuration/stats size mismatch");
  Vec g(config.points[i].coords.size());
  detail::point_gradient_impl(config, stats, i, g, nullptr);
  return TangentVector{config.points[i], std::move(g)};
}

/// One Gauss-Seidel sweep: points are updated in index order and each
/// gradient sees the already-updated positions of earlier points. Steps are
/// alpha * gradient, truncated to max_step. Returns the largest step taken.
/// Exact collisions (distance 0 with r > 0, where the objective is -inf) are
/// resolved by nudging the point 1e-8 along a deterministic tangent.
inline double ascent_step(PointConfiguration& config, const DiffRateMatrix& stats,
                          const OptimizerSettings& settings) {
  validate_settings(settings);
  if (config.size() != stats.n)
    throw std::domain_error("ascent_step: configuration/stats size mismatch");
  double max_taken = 0.0;
  for (int i = 0; i < config.size(); ++i) {
    int collision = -1;
    Vec g = detail::point_gradient_impl(config, stats, i, &collision);
    // a nudge of 1e-8 can fall below the distance resolution of the
    // Minkowski form (cosh(t/rho) - 1 underflows for rho near 1), so double
    // it until the pair separates
    for (double nudge_len = 1e-8; collision >= 0 && nudge_len < 1e-3;
         nudge_len *= 2.0) {
      const Vec nudge = detail::deterministic_tangent(config.points[i]);
      config.points[i] = exp_map(config.points[i], nudge_len * nudge);
      g = detail::point_gradient_impl(config, stats, i, &collision);
    }
    const double gnorm = std::sqrt(std::max(0.0, minkowski_dot(g, g)));
    if (gnorm == 0.0) continue;
    double step = settings.learning_rate * gnorm;
    Vec v = settings.learning_rate * g;
    if (step > settings.max_step) {
      v *= settings.max_step / step;
      step = settings.max_step;
    }
    config.points[i] = exp_map(config.points[i], v);
    if (step > max_taken) max_taken = step;
  }
  return max_taken;
}

/// Optional per-trace-point enrichment, reproducing the objective-vs-tree
/// comparison protocol: a topology is inferred from the current distances by
/// neighbor joining, compared to `reference_tree` by RF distance, and (when
/// an alignment is supplied) scored by its tuned tree log-likelihood.
struct TraceOptions {
  const Tree* reference_tree = nullptr;
  const Alignment* alignment = nullptr;
  std::function<void(const TraceRecord&)> sink;
};

struct OptimizeResult {
  PointConfiguration config;
  std::vector<TraceRecord> trace;
  bool converged = false;
  int sweeps = 0;
};

/// Gradient ascent until no point moves more than the convergence threshold
/// in a sweep, or max_iterations sweeps elapse. A TraceRecord is emitted for
/// the initial state, every trace_every-th sweep, and the final sweep.
/// Deterministic given inputs.
inline OptimizeResult optimize(PointConfiguration initial, const DiffRateMatrix& stats,
                               const OptimizerSettings& settings = {},
                               const TraceOptions* tracing = nullptr) {
  validate_settings(settings);
  if (initial.size() != stats.n)
    throw std::domain_error("optimize: configuration/stats size mismatch");
  if (initial.size() < 2) throw std::domain_error("optimize: need at least 2 points");

  OptimizeResult result;
  result.config = std::move(initial);

  auto emit = [&](int iteration, double step) {
    TraceRecord rec;
    rec.iteration = iteration;
    rec.objective = objective(result.config, stats);
    rec.max_step_taken = step;
    if (tracing && (tracing->reference_tree || tracing->alignment) &&
        result.config.size() >= 3) {
      const Tree inferred = neighbor_joining(config_distances(result.config));
      if (tracing->reference_tree)
        rec.rf_to_reference = rf_distance(inferred, *tracing->reference_tree);
      if (tracing->alignment)
        rec.tree_loglik = optimize_branch_lengths(inferred, *tracing->alignment).loglik;
    }
    if (tracing && tracing->sink) tracing->sink(rec);
    result.trace.push_back(std::move(rec));
  };

  emit(0, 0.0);
  for (int sweep = 1; sweep <= settings.max_iterations; ++sweep) {
    const double step = ascent_step(result.config, stats, settings);
    result.sweeps = sweep;
    bool traced = false;
    if (sweep % settings.trace_every == 0) {
      emit(sweep, step);
      traced = true;
    }
    if (step < settings.convergence_threshold) {
      result.converged = true;
      if (!traced) emit(sweep, step);
      break;
    }
    if (sweep == settings.max_iterations && !traced) emit(sweep, step);
  }
  return result;
}

}  // namespace hyptree
