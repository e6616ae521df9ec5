#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hyptree/distance_matrix.hpp"
#include "hyptree/rng.hpp"

namespace hyptree {

/// Binary phylogenetic tree with nonnegative branch lengths (expected
/// substitutions per site). Stored with parent/child links; an unrooted tree
/// keeps a trifurcation (or the NJ star) at the top node and rooted = false.
struct Tree {
  struct Node {
    std::string label;       // empty for internal nodes
    int parent = -1;
    double length = 0.0;     // edge to parent; ignored at the root
    std::vector<int> children;

    bool is_leaf() const { return children.empty(); }
  };

  std::vector<Node> nodes;
  int root = 0;
  bool rooted = false;

  int n_nodes() const { return static_cast<int>(nodes.size()); }

  int n_edges() const { return n_nodes() - 1; }

  int n_leaves() const {
    int k = 0;
    for (const auto& nd : nodes) k += nd.is_leaf() ? 1 : 0;
    return k;
  }

  std::vector<int> leaf_indices() const {
    std::vector<int> out;
    for (int i = 0; i < n_nodes(); ++i)
      if (nodes[i].is_leaf()) out.push_back(i);
    return out;
  }

  /// Leaf labels in sorted order — the canonical taxon order used by
  /// distance matrices and embeddings.
  std::vector<std::string> leaf_labels() const {
    std::vector<std::string> out;
    for (const auto& nd : nodes)
      if (nd.is_leaf()) out.push_back(nd.label);
    std::sort(out.begin(), out.end());
    return out;
  }

  int add_node(std::string label, int parent, double length) {
    const int id = n_nodes();
    nodes.push_back(Node{std::move(label), parent, length, {}});
    if (parent >= 0) nodes[parent].children.push_back(id);
    return id;
  }
};

struct newick_error : std::runtime_error {
  std::size_t offset;
  newick_error(const std::string& msg, std::size_t at)
      : std::runtime_error(msg + " (byte " + std::to_string(at) + ")"),
        offset(at) {}
};

namespace detail {

struct NewickParser {
  const std::string& text;
  std::size_t pos = 0;
  Tree tree;

  explicit NewickParser(const std::string& t) : text(t) {}

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw newick_error(msg, pos); }

  std::string read_name() {
    skip_space();
    const std::size_t start = pos;
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      ++pos;
    }
    return text.substr(start, pos - start);
  }

  double read_length() {
    skip_space();
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected branch length");
    pos += static_cast<std::size_t>(end - begin);
    return v;
  }

  int parse_subtree(int parent) {
    skip_space();
    if (peek() == '(') {
      const int node = tree.add_node("", parent, 0.0);
      ++pos; // '('
      parse_subtree(node);
      skip_space();
      while (peek() == ',') {
        ++pos;
        parse_subtree(node);
        skip_space();
      }
      if (peek() != ')') fail("expected ')' or ','");
      ++pos;
      read_name(); // internal labels are accepted and dropped
      maybe_length(node);
      return node;
    }
    const std::string name = read_name();
    if (name.empty()) fail("expected taxon label");
    const int node = tree.add_node(name, parent, 0.0);
    maybe_length(node);
    return node;
  }

  void maybe_length(int node) {
    skip_space();
    if (peek() == ':') {
      ++pos;
      tree.nodes[node].length = read_length();
    }
  }

  Tree run() {
    skip_space();
    if (peek() != '(') fail("expected '('");
    parse_subtree(-1);
    skip_space();
    if (peek() != ';') fail("expected ';'");
    ++pos;
    skip_space();
    if (pos != text.size()) fail("trailing characters after ';'");
    tree.root = 0;
    tree.rooted = tree.nodes[0].children.size() == 2;
    return std::move(tree);
  }
};

inline std::string format_length(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// Parses a Newick string. Branch lengths are optional (default 0); internal
/// node labels are tolerated and ignored. Syntax errors carry the byte
/// offset; duplicate or negative-length input is rejected after parsing.
inline Tree parse_newick(const std::string& text) {
  detail::NewickParser parser(text);
  Tree t = parser.run();
  std::unordered_set<std::string> seen;
  for (const auto& nd : t.nodes) {
    if (nd.is_leaf() && !seen.insert(nd.label).second)
      throw std::invalid_argument("parse_newick: duplicate leaf label '" + nd.label + "'");
    if (nd.length < 0.0)
      throw std::invalid_argument("parse_newick: negative branch length");
  }
  if (t.n_leaves() < 2) throw std::invalid_argument("parse_newick: fewer than 2 leaves");
  return t;
}

namespace detail {
inline Tree canonical_orientation(const Tree& t);
}

/// Canonical Newick: children ordered by their smallest descendant label,
/// lengths written with 6 decimals, and unrooted trees re-oriented at the
/// node adjacent to the smallest leaf. Isomorphic trees serialise
/// identically regardless of stored orientation.
inline std::string write_newick(const Tree& tree) {
  const Tree t = tree.rooted ? tree : detail::canonical_orientation(tree);
  std::vector<std::string> min_label(t.nodes.size());
  // children precede parents in add_node order only for parsed trees, so
  // compute minima with an explicit post-order walk
  {
    std::vector<int> stack = {t.root}, order;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (int c : t.nodes[v].children) stack.push_back(c);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto& nd = t.nodes[*it];
      if (nd.is_leaf()) {
        min_label[*it] = nd.label;
      } else {
        std::string best;
        for (int c : nd.children)
          if (best.empty() || min_label[c] < best) best = min_label[c];
        min_label[*it] = best;
      }
    }
  }

  std::string out;
  auto write = [&](auto&& self, int v) -> void {
    const auto& nd = t.nodes[v];
    if (nd.is_leaf()) {
      out += nd.label;
    } else {
      std::vector<int> kids = nd.children;
      std::sort(kids.begin(), kids.end(),
                [&](int a, int b) { return min_label[a] < min_label[b]; });
      out += '(';
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += ',';
        self(self, kids[i]);
      }
      out += ')';
    }
    if (v != t.root) out += ':' + detail::format_length(nd.length);
  };
  write(write, t.root);
  out += ';';
  return out;
}

inline Tree read_newick_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tree file: " + path);
  std::string line;
  std::getline(in, line);
  return parse_newick(line);
}

inline void write_newick_file(const std::string& path, const Tree& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tree file: " + path);
  out << write_newick(t) << '\n';
}

namespace detail {

using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

inline Adjacency tree_adjacency(const Tree& t) {
  Adjacency adj(t.nodes.size());
  for (int v = 0; v < t.n_nodes(); ++v) {
    const int p = t.nodes[v].parent;
    if (p < 0) continue;
    adj[v].push_back({p, t.nodes[v].length});
    adj[p].push_back({v, t.nodes[v].length});
  }
  return adj;
}

/// Rebuilds a Tree from an adjacency list, oriented away from new_root.
/// Node indices are reassigned in pre-order.
inline Tree orient_from(const Adjacency& adj,
                        const std::vector<std::string>& labels, int new_root,
                        bool rooted) {
  Tree out;
  out.rooted = rooted;
  std::vector<int> remap(adj.size(), -1);
  // (old node, old parent, new parent index, edge length)
  std::vector<std::tuple<int, int, int, double>> stack = {{new_root, -1, -1, 0.0}};
  while (!stack.empty()) {
    auto [v, from, new_parent, len] = stack.back();
    stack.pop_back();
    const int id = out.add_node(labels[v], new_parent, len);
    remap[v] = id;
    for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it)
      if (it->first != from) stack.push_back({it->first, v, id, it->second});
  }
  out.root = remap[new_root];
  return out;
}

/// Re-orients an unrooted tree at the neighbour of its smallest leaf, the
/// canonical representative among the tree's possible stored orientations.
inline Tree canonical_orientation(const Tree& t) {
  int best_leaf = -1;
  for (int i = 0; i < t.n_nodes(); ++i)
    if (t.nodes[i].is_leaf() &&
        (best_leaf < 0 || t.nodes[i].label < t.nodes[best_leaf].label))
      best_leaf = i;
  if (best_leaf < 0) return t;
  const auto adj = tree_adjacency(t);
  if (adj[best_leaf].empty()) return t;
  const int top = adj[best_leaf][0].first;
  std::vector<std::string> labels;
  for (const auto& nd : t.nodes) labels.push_back(nd.label);
  return orient_from(adj, labels, top, false);
}

/// Distances (and predecessors) from a start node to every node of the tree.
inline void walk_distances(const Adjacency& adj, int start,
                           std::vector<double>& dist, std::vector<int>& pred) {
  dist.assign(adj.size(), 0.0);
  pred.assign(adj.size(), -1);
  std::vector<int> stack = {start};
  std::vector<char> seen(adj.size(), 0);
  seen[start] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [w, len] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = 1;
      dist[w] = dist[v] + len;
      pred[w] = v;
      stack.push_back(w);
    }
  }
}

}  // namespace detail

/// Path-length metric between leaves, labels in sorted order.
inline DistanceMatrix leaf_distances(const Tree& t) {
  const auto adj = detail::tree_adjacency(t);
  std::vector<std::pair<std::string, int>> leaves;
  for (int i = 0; i < t.n_nodes(); ++i)
    if (t.nodes[i].is_leaf()) leaves.push_back({t.nodes[i].label, i});
  std::sort(leaves.begin(), leaves.end());

  const int n = static_cast<int>(leaves.size());
  DistanceMatrix dm;
  dm.d = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> dist;
  std::vector<int> pred;
  for (int i = 0; i < n; ++i) {
    dm.labels.push_back(leaves[i].first);
    detail::walk_distances(adj, leaves[i].second, dist, pred);
    for (int j = 0; j < n; ++j)
      if (j != i) dm.d(i, j) = dist[leaves[j].second];
  }
  // symmetrise exactly; the two walks agree up to summation order
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) dm.d(j, i) = dm.d(i, j);
  return dm;
}

/// Random unrooted binary topology over leaves t1..tn (zero-padded), grown
/// by attaching each new leaf to a uniformly random edge of the current
/// tree. Edge lengths are left at 0. Deterministic given seed.
inline Tree random_topology(int n_leaves, std::uint64_t seed) {
  if (n_leaves < 3) throw std::domain_error("random_topology: need n >= 3");
  int width = 1;
  for (int v = n_leaves; v >= 10; v /= 10) ++width;
  auto label = [&](int i) {
    std::string digits = std::to_string(i + 1);
    return "t" + std::string(width - digits.size(), '0') + digits;
  };

  Rng rng(seed);
  Tree t;
  t.rooted = false;
  t.add_node("", -1, 0.0); // central node of the initial 3-leaf star
  for (int i = 0; i < 3; ++i) t.add_node(label(i), 0, 0.0);
  for (int i = 3; i < n_leaves; ++i) {
    // edges correspond to non-root nodes; pick one uniformly and subdivide
    const int v = 1 + static_cast<int>(rng.uniform_int(t.n_nodes() - 1));
    const int old_parent = t.nodes[v].parent;
    const int mid = t.add_node("", old_parent, 0.0);
    auto& siblings = t.nodes[old_parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), v));
    t.nodes[v].parent = mid;
    t.nodes[mid].children.push_back(v);
    t.add_node(label(i), mid, 0.0);
  }
  return t;
}

/// Draws every edge length i.i.d. uniform [lo, hi]. Deterministic given seed.
inline Tree sample_edge_lengths(const Tree& t, double lo, double hi,
                                std::uint64_t seed) {
  if (!(lo >= 0.0) || !(lo <= hi))
    throw std::domain_error("sample_edge_lengths: need 0 <= lo <= hi");
  Rng rng(seed);
  Tree out = t;
  for (int v = 0; v < out.n_nodes(); ++v)
    if (v != out.root) out.nodes[v].length = rng.uniform(lo, hi);
  return out;
}

inline Tree suppress_root(const Tree& t);

/// Roots the tree at the midpoint of the longest leaf-to-leaf path. Ties are
/// broken by the lexicographically smallest endpoint label pair. A
/// bifurcating top node on the input is suppressed first, so rooted inputs
/// are re-rooted rather than left with a stray degree-2 node.
inline Tree midpoint_root(const Tree& input) {
  if (input.n_leaves() < 2)
    throw std::invalid_argument("midpoint_root: need at least 2 leaves");
  if (input.n_leaves() == 2) {
    // a 2-leaf tree is a single edge; halve it
    std::vector<std::pair<std::string, int>> pair;
    for (int i = 0; i < input.n_nodes(); ++i)
      if (input.nodes[i].is_leaf()) pair.push_back({input.nodes[i].label, i});
    std::sort(pair.begin(), pair.end());
    const DistanceMatrix dm = leaf_distances(input);
    Tree out;
    out.rooted = true;
    out.add_node("", -1, 0.0);
    out.add_node(pair[0].first, 0, dm.d(0, 1) / 2.0);
    out.add_node(pair[1].first, 0, dm.d(0, 1) / 2.0);
    return out;
  }
  const Tree t = input.nodes[input.root].children.size() == 2
                     ? suppress_root(input)
                     : input;
  const auto adj = detail::tree_adjacency(t);
  std::vector<std::pair<std::string, int>> leaves;
  for (int i = 0; i < t.n_nodes(); ++i)
    if (t.nodes[i].is_leaf()) leaves.push_back({t.nodes[i].label, i});
  std::sort(leaves.begin(), leaves.end());
  const int n = static_cast<int>(leaves.size());

  double best = -1.0;
  int best_u = -1, best_v = -1;
  std::vector<double> dist;
  std::vector<int> pred;
  for (int i = 0; i < n; ++i) {
    detail::walk_distances(adj, leaves[i].second, dist, pred);
    for (int j = i + 1; j < n; ++j) {
      if (dist[leaves[j].second] > best) {
        best = dist[leaves[j].second];
        best_u = leaves[i].second;
        best_v = leaves[j].second;
      }
    }
  }

  // walk u -> v; place the root where the accumulated length reaches half
  detail::walk_distances(adj, best_u, dist, pred);
  std::vector<int> path = {best_v};
  while (path.back() != best_u) path.push_back(pred[path.back()]);
  std::reverse(path.begin(), path.end());

  const double half = best / 2.0;
  double cum = 0.0;
  int a = path[0], b = path.size() > 1 ? path[1] : path[0];
  double offset = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    a = path[k];
    b = path[k + 1];
    double len = 0.0;
    for (const auto& [w, l] : adj[a])
      if (w == b) len = l;
    if (cum + len >= half || k + 2 == path.size()) {
      offset = half - cum;
      break;
    }
    cum += len;
  }

  // split edge (a, b) at `offset` from a with a new root node
  detail::Adjacency adj2 = adj;
  std::vector<std::string> labels;
  for (const auto& nd : t.nodes) labels.push_back(nd.label);
  double len_ab = 0.0;
  auto drop_edge = [&](int x, int y, double& len) {
    auto& lst = adj2[x];
    for (std::size_t i = 0; i < lst.size(); ++i)
      if (lst[i].first == y) {
        len = lst[i].second;
        lst.erase(lst.begin() + i);
        return;
      }
  };
  drop_edge(a, b, len_ab);
  drop_edge(b, a, len_ab);
  offset = std::min(std::max(offset, 0.0), len_ab);
  const int r = static_cast<int>(adj2.size());
  adj2.push_back({});
  labels.push_back("");
  adj2[r].push_back({a, offset});
  adj2[a].push_back({r, offset});
  adj2[r].push_back({b, len_ab - offset});
  adj2[b].push_back({r, len_ab - offset});
  return detail::orient_from(adj2, labels, r, true);
}

/// Removes a bifurcating root, re-joining its two edges — the inverse of
/// midpoint_root up to node numbering.
inline Tree suppress_root(const Tree& t) {
  if (t.nodes[t.root].children.size() != 2) return t;
  const int a = t.nodes[t.root].children[0];
  const int b = t.nodes[t.root].children[1];
  auto adj = detail::tree_adjacency(t);
  const double joined = t.nodes[a].length + t.nodes[b].length;
  auto drop = [&](int x, int y) {
    auto& lst = adj[x];
    for (std::size_t i = 0; i < lst.size(); ++i)
      if (lst[i].first == y) {
        lst.erase(lst.begin() + i);
        return;
      }
  };
  drop(a, t.root);
  drop(b, t.root);
  adj[t.root].clear();
  adj[a].push_back({b, joined});
  adj[b].push_back({a, joined});
  std::vector<std::string> labels;
  for (const auto& nd : t.nodes) labels.push_back(nd.label);
  const int new_root = t.nodes[a].is_leaf() ? b : a;
  // the old root is now isolated; orient_from only copies reachable nodes
  return detail::orient_from(adj, labels, new_root, false);
}

namespace detail {

/// Canonical non-trivial bipartitions of the (unrooted) tree as strings of
/// '0'/'1' over the sorted label universe, normalised so position 0 is '0'.
inline std::unordered_set<std::string> tree_splits(
    const Tree& t, const std::unordered_map<std::string, int>& label_index) {
  const int n = static_cast<int>(label_index.size());
  std::vector<std::string> mask(t.nodes.size(), std::string(n, '0'));
  std::vector<int> stack = {t.root}, order;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int c : t.nodes[v].children) stack.push_back(c);
  }
  std::unordered_set<std::string> splits;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& nd = t.nodes[*it];
    if (nd.is_leaf()) {
      mask[*it][label_index.at(nd.label)] = '1';
    } else {
      for (int c : nd.children)
        for (int k = 0; k < n; ++k)
          if (mask[c][k] == '1') mask[*it][k] = '1';
    }
    if (*it == t.root) continue;
    int ones = 0;
    for (char c : mask[*it]) ones += c == '1';
    if (ones < 2 || ones > n - 2) continue;
    std::string key = mask[*it];
    if (key[0] == '1')
      for (auto& c : key) c = c == '1' ? '0' : '1';
    splits.insert(std::move(key));
  }
  return splits;
}

}  // namespace detail

/// Robinson-Foulds distance: the number of non-trivial bipartitions present
/// in exactly one of the two trees. Root placement is immaterial.
inline int rf_distance(const Tree& t1, const Tree& t2) {
  const auto l1 = t1.leaf_labels();
  const auto l2 = t2.leaf_labels();
  if (l1 != l2) throw std::domain_error("rf_distance: leaf label sets differ");
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(l1.size()); ++i) index[l1[i]] = i;
  const auto s1 = detail::tree_splits(t1, index);
  const auto s2 = detail::tree_splits(t2, index);
  int diff = 0;
  for (const auto& s : s1) diff += s2.count(s) ? 0 : 1;
  for (const auto& s : s2) diff += s1.count(s) ? 0 : 1;
  return diff;
}

}  // namespace hyptree
