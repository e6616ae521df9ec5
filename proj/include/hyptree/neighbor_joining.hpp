#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hyptree/distance_matrix.hpp"
#include "hyptree/tree.hpp"

namespace hyptree {

/// Canonical neighbor joining. Agglomerates the pair minimising the
/// Q-criterion Q(i,j) = (n-2) d(i,j) - R_i - R_j until three clusters
/// remain, then closes the star. Ties pick the lexicographically smallest
/// cluster-id pair; negative inferred branch lengths are clamped to 0.
/// Consistent: exact additive metrics are recovered with topology and edge
/// lengths intact.
inline Tree neighbor_joining(const DistanceMatrix& dm) {
  validate_distance_matrix(dm);
  const int n = dm.size();
  if (n < 3) throw std::domain_error("neighbor_joining: need at least 3 taxa");

  // cluster slots: 0..n-1 original taxa, then one per join
  const int slots = 2 * n - 2;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(slots, slots);
  d.topLeftCorner(n, n) = dm.d;

  Tree t;
  t.rooted = false;
  std::vector<int> node_of(slots, -1);
  // leaves are created up front; parents are fixed up at join time
  for (int i = 0; i < n; ++i) node_of[i] = t.add_node(dm.labels[i], -1, 0.0);

  std::vector<int> active;
  for (int i = 0; i < n; ++i) active.push_back(i);
  int next_slot = n;

  auto attach = [&](int child_slot, int parent_node, double length) {
    const int c = node_of[child_slot];
    t.nodes[c].parent = parent_node;
    t.nodes[c].length = std::max(0.0, length);
    t.nodes[parent_node].children.push_back(c);
  };

  while (static_cast<int>(active.size()) > 3) {
    const int m = static_cast<int>(active.size());
    std::vector<double> row_sum(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) row_sum[i] += d(active[i], active[j]);

    double best_q = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double q = (m - 2) * d(active[i], active[j]) - row_sum[i] - row_sum[j];
        if (q < best_q) {
          best_q = q;
          bi = i;
          bj = j;
        }
      }

    const int a = active[bi], b = active[bj];
    const double dab = d(a, b);
    const double la = 0.5 * dab + (row_sum[bi] - row_sum[bj]) / (2.0 * (m - 2));
    const double lb = dab - la;
    const int u = next_slot++;
    node_of[u] = t.add_node("", -1, 0.0);
    attach(a, node_of[u], la);
    attach(b, node_of[u], lb);

    for (int k : active) {
      if (k == a || k == b) continue;
      const double v = 0.5 * (d(a, k) + d(b, k) - dab);
      d(u, k) = d(k, u) = v;
    }
    // replace a by u, remove b; erase order keeps cluster ids ascending
    active[bi] = u;
    active.erase(active.begin() + bj);
    std::sort(active.begin(), active.end());
  }

  // three-point formulas for the final star
  const int a = active[0], b = active[1], c = active[2];
  const int top = t.add_node("", -1, 0.0);
  attach(a, top, 0.5 * (d(a, b) + d(a, c) - d(b, c)));
  attach(b, top, 0.5 * (d(a, b) + d(b, c) - d(a, c)));
  attach(c, top, 0.5 * (d(a, c) + d(b, c) - d(a, b)));
  t.root = top;
  return t;
}

}  // namespace hyptree
