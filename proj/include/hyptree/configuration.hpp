#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hyptree/distance_matrix.hpp"
#include "hyptree/geometry.hpp"

namespace hyptree {

/// Ordered collection of N points on a shared hyperboloid, one per taxon.
/// This is the optimiser's state; labels align with the row order of the
/// DiffRateMatrix the objective is evaluated against.
struct PointConfiguration {
  std::vector<std::string> labels;
  std::vector<HyperPoint> points;

  int size() const { return static_cast<int>(points.size()); }
  double rho() const { return points.empty() ? 1.0 : points.front().rho; }
  int dim() const { return points.empty() ? 0 : points.front().dim(); }
};

inline void validate_configuration(const PointConfiguration& config,
                                   double membership_tol = 1e-9) {
  if (config.labels.size() != config.points.size())
    throw std::invalid_argument("configuration: label/point count mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& l : config.labels)
    if (l.empty() || !seen.insert(l).second)
      throw std::invalid_argument("configuration: labels must be unique and nonempty");
  for (const auto& p : config.points) {
    if (p.dim() != config.dim() || p.rho != config.rho())
      throw std::invalid_argument("configuration: points do not share (m, rho)");
    if (!on_hyperboloid(p, membership_tol))
      throw std::invalid_argument("configuration: point off the hyperboloid");
  }
}

/// Pairwise geodesic distances of the configuration.
inline DistanceMatrix config_distances(const PointConfiguration& config) {
  const int n = config.size();
  if (n < 2) throw std::invalid_argument("config_distances: need at least 2 points");
  DistanceMatrix dm;
  dm.labels = config.labels;
  dm.d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dm.d(i, j) = dm.d(j, i) =
          hyperbolic_distance(config.points[i], config.points[j]);
  return dm;
}

/// Reorders the configuration's points to match `labels`.
inline PointConfiguration reorder_configuration(
    const PointConfiguration& config, const std::vector<std::string>& labels) {
  if (labels.size() != config.labels.size())
    throw std::invalid_argument("reorder_configuration: label count mismatch");
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < config.size(); ++i) index[config.labels[i]] = i;
  PointConfiguration out;
  out.labels = labels;
  out.points.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = index.find(l);
    if (it == index.end())
      throw std::invalid_argument("reorder_configuration: unknown label '" + l + "'");
    out.points.push_back(config.points[it->second]);
  }
  return out;
}

}  // namespace hyptree
