#pragma once

#include <cmath>
#include <stdexcept>

#include "hyptree/jukes_cantor.hpp"
#include "hyptree/tree.hpp"

namespace hyptree {

struct BranchOptResult {
  Tree tree;
  double loglik = 0.0;
  int sweeps = 0;
};

namespace detail {

/// Golden-section maximisation of a unimodal function on [lo, hi].
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace detail

/// Tunes branch lengths for a fixed topology by coordinate ascent: each edge
/// is maximised by golden-section search on [0, k_max_distance], sweeping
/// until the total log-likelihood gain drops below `tol`. The log-likelihood
/// never decreases (a candidate is only adopted when it does not lose).
inline BranchOptResult optimize_branch_lengths(const Tree& tree, const Alignment& a,
                                               double tol = 1e-6,
                                               int max_sweeps = 50) {
  BranchOptResult out;
  out.tree = tree;
  out.loglik = tree_loglik(out.tree, a);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    const double before = out.loglik;
    for (int v = 0; v < out.tree.n_nodes(); ++v) {
      if (v == out.tree.root) continue;
      const double keep = out.tree.nodes[v].length;
      const double cand = detail::golden_section_max(
          [&](double len) {
            out.tree.nodes[v].length = len;
            return tree_loglik(out.tree, a);
          },
          0.0, k_max_distance, tol);
      out.tree.nodes[v].length = cand;
      const double cand_ll = tree_loglik(out.tree, a);
      if (cand_ll >= out.loglik) {
        out.loglik = cand_ll;
      } else {
        out.tree.nodes[v].length = keep;
      }
    }
    out.sweeps = sweep;
    if (out.loglik - before < tol) break;
  }
  return out;
}

}  // namespace hyptree
