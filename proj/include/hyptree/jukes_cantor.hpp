#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyptree/alignment.hpp"
#include "hyptree/distance_matrix.hpp"
#include "hyptree/rng.hpp"
#include "hyptree/tree.hpp"

namespace hyptree {

/// Distance assigned to saturated pairs (r >= 3/4), where the ML formula
/// diverges. Also the upper bracket for branch-length searches.
inline constexpr double k_max_distance = 10.0;

/// Jukes-Cantor probability of observing the same base after time t:
/// 1/4 + (3/4) e^{-4t/3}.
inline double jc_p_same(double t) {
  if (!(t >= 0.0)) throw std::domain_error("jc_p_same: t must be >= 0");
  return 0.25 + 0.75 * std::exp(-4.0 * t / 3.0);
}

/// Probability of observing one particular different base after time t:
/// 1/4 - (1/4) e^{-4t/3}. Satisfies jc_p_same(t) + 3 jc_p_diff(t) = 1.
inline double jc_p_diff(double t) {
  if (!(t >= 0.0)) throw std::domain_error("jc_p_diff: t must be >= 0");
  return 0.25 - 0.25 * std::exp(-4.0 * t / 3.0);
}

/// Two-taxon log-likelihood of evolutionary distance t given a difference
/// rate r over L sites, with the constant pi term dropped:
///   L [ (1-r) log p_same(t) + r log p_diff(t) ].
/// Equals the per-site sum over any alignment realising r exactly. Returns
/// -inf for r > 0 at t = 0.
inline double pairwise_loglik(double r, long L, double t) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("pairwise_loglik: r must be in [0,1]");
  if (L < 1) throw std::domain_error("pairwise_loglik: L must be positive");
  if (!(t >= 0.0)) throw std::domain_error("pairwise_loglik: t must be >= 0");
  double per_site = (1.0 - r) * std::log(jc_p_same(t));
  if (r > 0.0) per_site += r * std::log(jc_p_diff(t));
  return static_cast<double>(L) * per_site;
}

/// Maximum-likelihood JC distance for a difference rate r:
/// -(3/4) ln(1 - 4r/3), capped at k_max_distance once r >= 3/4.
inline double ml_pairwise_distance(double r) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::domain_error("ml_pairwise_distance: r must be in [0,1]");
  if (r >= 0.75) return k_max_distance;
  const double t = -0.75 * std::log(1.0 - 4.0 * r / 3.0);
  return std::min(t, k_max_distance);
}

/// Matrix of independently ML-estimated pairwise distances.
inline DistanceMatrix ml_distance_matrix(const DiffRateMatrix& stats,
                                         const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != stats.n)
    throw std::invalid_argument("ml_distance_matrix: label count mismatch");
  DistanceMatrix dm;
  dm.labels = labels;
  dm.d = Eigen::MatrixXd::Zero(stats.n, stats.n);
  for (int i = 0; i < stats.n; ++i)
    for (int j = i + 1; j < stats.n; ++j)
      dm.d(i, j) = dm.d(j, i) = ml_pairwise_distance(stats.rates(i, j));
  return dm;
}

/// Evolves sequences of length L down the tree under the Jukes-Cantor model:
/// the root site is uniform over {A,C,G,T} and each child state is drawn via
/// P(branch length). Taxa are emitted in sorted label order. Deterministic
/// given seed.
inline Alignment simulate_alignment(const Tree& tree, long L, std::uint64_t seed) {
  if (L < 1) throw std::domain_error("simulate_alignment: L must be positive");
  if (tree.n_leaves() < 2)
    throw std::domain_error("simulate_alignment: need at least 2 leaves");

  // pre-order node list and per-node stay probability
  std::vector<int> order;
  {
    std::vector<int> stack = {tree.root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (auto it = tree.nodes[v].children.rbegin();
           it != tree.nodes[v].children.rend(); ++it)
        stack.push_back(*it);
    }
  }
  std::vector<double> p_stay(tree.n_nodes(), 1.0);
  for (int v : order)
    if (v != tree.root) p_stay[v] = jc_p_same(tree.nodes[v].length);

  Rng rng(seed);
  std::vector<int> state(tree.n_nodes(), 0);
  std::vector<std::pair<std::string, std::string>> rows; // label -> sequence
  for (int v : order)
    if (tree.nodes[v].is_leaf()) rows.push_back({tree.nodes[v].label, std::string()});
  std::sort(rows.begin(), rows.end());
  std::unordered_map<std::string, int> row_of;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    rows[i].second.resize(L);
    row_of[rows[i].first] = i;
  }

  for (long s = 0; s < L; ++s) {
    for (int v : order) {
      if (v == tree.root) {
        state[v] = static_cast<int>(rng.uniform_int(4));
      } else {
        const int parent_state = state[tree.nodes[v].parent];
        const double u = rng.uniform();
        if (u < p_stay[v]) {
          state[v] = parent_state;
        } else {
          // remaining mass is split evenly over the three other bases
          const double q = (1.0 - p_stay[v]) / 3.0;
          int k = static_cast<int>((u - p_stay[v]) / q);
          if (k > 2) k = 2;
          state[v] = (parent_state + 1 + k) % 4;
        }
      }
      if (tree.nodes[v].is_leaf())
        rows[row_of[tree.nodes[v].label]].second[s] = index_base(state[v]);
    }
  }

  Alignment a;
  for (auto& [label, seq] : rows) {
    a.taxa.push_back(label);
    a.sequences.push_back(std::move(seq));
  }
  return a;
}

/// Full-tree Jukes-Cantor log-likelihood by Felsenstein pruning with a
/// uniform root distribution. Includes the stationary constant, so values
/// are absolute (comparable across methods).
inline double tree_loglik(const Tree& tree, const Alignment& a) {
  validate_alignment(a);
  std::unordered_map<std::string, int> taxon_row;
  for (int i = 0; i < a.size(); ++i) taxon_row[a.taxa[i]] = i;
  for (const auto& nd : tree.nodes)
    if (nd.is_leaf() && !taxon_row.count(nd.label))
      throw std::domain_error("tree_loglik: leaf '" + nd.label + "' missing from alignment");
  if (tree.n_leaves() != a.size())
    throw std::domain_error("tree_loglik: leaf set does not match alignment taxa");

  // post-order traversal; per-node transition entries p (same) and q (other)
  std::vector<int> order;
  {
    std::vector<int> stack = {tree.root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (int c : tree.nodes[v].children) stack.push_back(c);
    }
    std::reverse(order.begin(), order.end());
  }
  const int n_nodes = tree.n_nodes();
  std::vector<double> p(n_nodes, 1.0), q(n_nodes, 0.0);
  for (int v = 0; v < n_nodes; ++v) {
    if (v == tree.root) continue;
    p[v] = jc_p_same(tree.nodes[v].length);
    q[v] = jc_p_diff(tree.nodes[v].length);
  }

  const long L = a.length();
  std::vector<std::array<double, 4>> partial(n_nodes);
  double loglik = 0.0;
  for (long s = 0; s < L; ++s) {
    double log_scale = 0.0;
    for (int v : order) {
      auto& pv = partial[v];
      if (tree.nodes[v].is_leaf()) {
        pv = {0.0, 0.0, 0.0, 0.0};
        pv[base_index(a.sequences[taxon_row[tree.nodes[v].label]][s])] = 1.0;
      } else {
        pv = {1.0, 1.0, 1.0, 1.0};
        for (int c : tree.nodes[v].children) {
          const auto& pc = partial[c];
          const double sum = pc[0] + pc[1] + pc[2] + pc[3];
          for (int b = 0; b < 4; ++b)
            pv[b] *= q[c] * sum + (p[c] - q[c]) * pc[b];
        }
        const double mx = std::max(std::max(pv[0], pv[1]), std::max(pv[2], pv[3]));
        if (mx > 0.0 && mx < 1e-250) {
          for (double& x : pv) x /= mx;
          log_scale += std::log(mx);
        }
      }
    }
    const auto& pr = partial[tree.root];
    loglik += std::log(0.25 * (pr[0] + pr[1] + pr[2] + pr[3])) + log_scale;
  }
  return loglik;
}

}  // namespace hyptree
