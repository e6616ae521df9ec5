#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hyptree/configuration.hpp"
#include "hyptree/geometry.hpp"
#include "hyptree/rng.hpp"
#include "hyptree/tree.hpp"

namespace hyptree {

struct EmbeddingConfig {
  int dim = 2;        // m >= 2
  double rho = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline Vec random_unit_tangent(const HyperPoint& x, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec g(x.coords.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.gaussian();
    Vec v = project_to_tangent(x, g);
    const double n = std::sqrt(std::max(0.0, minkowski_dot(v, v)));
    if (n > 1e-9) return v / n;
  }
  throw std::runtime_error("embed_tree: failed to draw a tangent direction");
}

/// Unit tangent orthogonal to e1 (in the restricted, positive-definite form),
/// spanning the random 2-D subspace together with e1.
inline Vec orthonormal_partner(const HyperPoint& x, const Vec& e1, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec w = random_unit_tangent(x, rng);
    w -= minkowski_dot(e1, w) * e1;
    const double n = std::sqrt(std::max(0.0, minkowski_dot(w, w)));
    if (n > 1e-9) return w / n;
  }
  throw std::runtime_error("embed_tree: failed to complete a tangent frame");
}

/// Positions for every node of the rooted tree: the root sits at the
/// basepoint, children fan out by exponential-map steps of their edge
/// lengths, uniformly spaced in a random tangent 2-plane that contains the
/// direction back to the parent (for non-root nodes).
inline std::vector<HyperPoint> embed_nodes(const Tree& tree,
                                           const EmbeddingConfig& cfg) {
  if (!tree.rooted) throw std::domain_error("embed_tree: tree must be rooted");
  if (cfg.dim < 2) throw std::domain_error("embed_tree: dimension must be >= 2");
  if (!(cfg.rho > 0.0)) throw std::domain_error("embed_tree: rho must be positive");

  Rng rng(cfg.seed);
  std::vector<HyperPoint> pos(tree.n_nodes(), basepoint(cfg.dim, cfg.rho));

  std::vector<int> stack = {tree.root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const auto& children = tree.nodes[v].children;
    if (!children.empty()) {
      const int c = static_cast<int>(children.size());
      Vec e1, e2;
      bool has_parent_dir = false;
      if (v != tree.root) {
        const TangentVector toward_parent = log_map(pos[v], pos[tree.nodes[v].parent]);
        const double n = toward_parent.norm();
        if (n > 1e-12) {
          e1 = toward_parent.vec / n;
          has_parent_dir = true;
        }
      }
      if (!has_parent_dir) e1 = random_unit_tangent(pos[v], rng);
      e2 = orthonormal_partner(pos[v], e1, rng);

      // angle 0 is the parent direction; the root has no parent slot
      const int slots = (v == tree.root && !has_parent_dir) ? c : c + 1;
      const int first = slots == c ? 0 : 1;
      for (int k = 0; k < c; ++k) {
        const double theta = 2.0 * std::numbers::pi * (first + k) / slots;
        const Vec dir = std::cos(theta) * e1 + std::sin(theta) * e2;
        const double len = tree.nodes[children[k]].length;
        pos[children[k]] = len > 0.0 ? exp_map(pos[v], len * dir) : pos[v];
      }
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it)
      stack.push_back(*it);
  }
  return pos;
}

}  // namespace detail

/// Initial placement of the taxa: embeds the rooted guide tree and keeps the
/// leaf positions only, ordered by taxon label. Deterministic given cfg.
inline PointConfiguration embed_tree(const Tree& tree, const EmbeddingConfig& cfg) {
  const auto pos = detail::embed_nodes(tree, cfg);
  std::vector<std::pair<std::string, int>> leaves;
  for (int i = 0; i < tree.n_nodes(); ++i)
    if (tree.nodes[i].is_leaf()) leaves.push_back({tree.nodes[i].label, i});
  std::sort(leaves.begin(), leaves.end());

  PointConfiguration config;
  for (const auto& [label, idx] : leaves) {
    config.labels.push_back(label);
    config.points.push_back(pos[idx]);
  }
  return config;
}

}  // namespace hyptree
