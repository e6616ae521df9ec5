#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyptree/embedding.hpp"
#include "hyptree/tree.hpp"
#include "test_helpers.hpp"

using namespace hyptree;
using Catch::Matchers::WithinAbs;

TEST_CASE("a single edge lands at the edge length", "[embedding]") {
  Tree t;
  t.rooted = true;
  t.add_node("", -1, 0.0);
  t.add_node("leaf", 0, 0.8);
  const PointConfiguration config = embed_tree(t, {3, 0.5, 11});
  REQUIRE(config.size() == 1);
  CHECK_THAT(hyperbolic_distance(config.points[0], basepoint(3, 0.5)),
             WithinAbs(0.8, 1e-12));
}

TEST_CASE("root children are uniformly spaced at their edge lengths", "[embedding]") {
  Tree t;
  t.rooted = true;
  t.add_node("", -1, 0.0);
  t.add_node("a", 0, 0.3);
  t.add_node("b", 0, 0.4);
  t.add_node("c", 0, 0.5);
  const EmbeddingConfig cfg{2, 1.0, 5};
  const PointConfiguration config = embed_tree(t, cfg);
  const HyperPoint b = basepoint(2, 1.0);

  const double lengths[3] = {0.3, 0.4, 0.5};
  std::vector<Vec> dirs;
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(hyperbolic_distance(b, config.points[i]), WithinAbs(lengths[i], 1e-12));
    const TangentVector l = log_map(b, config.points[i]);
    dirs.push_back(l.vec / l.norm());
  }
  // consecutive children in stored order sit 2*pi/3 apart
  for (int i = 0; i < 3; ++i)
    CHECK_THAT(minkowski_dot(dirs[i], dirs[(i + 1) % 3]),
               WithinAbs(std::cos(2.0 * std::numbers::pi / 3.0), 1e-9));
}

TEST_CASE("an only child continues straight through its parent", "[embedding]") {
  Tree t;
  t.rooted = true;
  t.add_node("", -1, 0.0);
  const int a = t.add_node("", 0, 1.0);
  t.add_node("b", a, 1.0);
  const PointConfiguration config = embed_tree(t, {2, 1.0, 23});
  REQUIRE(config.size() == 1);
  CHECK_THAT(hyperbolic_distance(config.points[0], basepoint(2, 1.0)),
             WithinAbs(2.0, 1e-9));
}

TEST_CASE("edges are embedded isometrically", "[embedding]") {
  for (int seed = 0; seed < 10; ++seed) {
    Tree t = random_topology(9, seed);
    t = sample_edge_lengths(t, 0.05, 0.2, 70 + seed);
    const Tree rooted = midpoint_root(t);
    const EmbeddingConfig cfg{3, 0.5, static_cast<std::uint64_t>(seed)};
    const auto pos = detail::embed_nodes(rooted, cfg);
    for (int v = 0; v < rooted.n_nodes(); ++v) {
      if (v == rooted.root) continue;
      CHECK_THAT(hyperbolic_distance(pos[v], pos[rooted.nodes[v].parent]),
                 WithinAbs(rooted.nodes[v].length, 1e-9));
    }
  }
}

TEST_CASE("embedding output is valid, sorted and deterministic", "[embedding]") {
  Tree t = random_topology(8, 3);
  t = sample_edge_lengths(t, 0.05, 0.2, 4);
  const Tree rooted = midpoint_root(t);
  const EmbeddingConfig cfg{5, 0.5, 99};
  const PointConfiguration c1 = embed_tree(rooted, cfg);
  const PointConfiguration c2 = embed_tree(rooted, cfg);
  validate_configuration(c1);
  CHECK(c1.labels == rooted.leaf_labels());
  REQUIRE(c1.size() == c2.size());
  for (int i = 0; i < c1.size(); ++i)
    CHECK(c1.points[i].coords == c2.points[i].coords);

  const PointConfiguration c3 = embed_tree(rooted, {5, 0.5, 100});
  bool any_differ = false;
  for (int i = 0; i < c1.size(); ++i)
    any_differ = any_differ || c1.points[i].coords != c3.points[i].coords;
  CHECK(any_differ);
}

TEST_CASE("unrooted input is rejected", "[embedding]") {
  const Tree t = random_topology(5, 1);
  CHECK_THROWS_AS(embed_tree(t, {3, 0.5, 1}), std::domain_error);
  const Tree rooted = midpoint_root(sample_edge_lengths(t, 0.1, 0.1, 2));
  CHECK_THROWS_AS(embed_tree(rooted, {1, 0.5, 1}), std::domain_error);
}

TEST_CASE("balanced tree embeds close to its metric at high curvature", "[embedding]") {
  const Tree fig = midpoint_root(testutil::balanced8(0.25));
  const DistanceMatrix tree_dm = leaf_distances(fig);
  const PointConfiguration config = embed_tree(fig, {3, 0.2, 7});
  const DistanceMatrix emb_dm = config_distances(config);
  REQUIRE(emb_dm.labels == tree_dm.labels);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      worst = std::max(worst, std::abs(emb_dm.d(i, j) - tree_dm.d(i, j)));
  // the 2*pi/(c+1) spacing bends deep paths by 120 degrees at each internal
  // node; the worst deviation measures 0.27..0.31 over seeds (the optimizer
  // closes the remainder)
  CHECK(worst < 0.35);
  // the triangle inequality caps embedded distances by the path lengths
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(emb_dm.d(i, j) <= tree_dm.d(i, j) + 1e-9);
}
