#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <map>

#include "hyptree/branch_optimize.hpp"
#include "hyptree/jukes_cantor.hpp"
#include "hyptree/neighbor_joining.hpp"
#include "hyptree/tree.hpp"
#include "test_helpers.hpp"

using namespace hyptree;
using Catch::Matchers::WithinAbs;

TEST_CASE("parse and write a two-leaf tree", "[treekit]") {
  const Tree t = parse_newick("(A:1,B:1);");
  CHECK(t.n_leaves() == 2);
  CHECK(t.rooted);
  CHECK(write_newick(t) == "(A:1.000000,B:1.000000);");
}

TEST_CASE("parse the quartet AB|CD", "[treekit]") {
  const Tree t = parse_newick("((A:1,B:1):1,(C:1,D:1):1);");
  const DistanceMatrix dm = leaf_distances(t);
  REQUIRE(dm.labels == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(dm.d(0, 1) == 2.0);
  CHECK(dm.d(2, 3) == 2.0);
  CHECK(dm.d(0, 2) == 4.0);
  CHECK(dm.d(1, 3) == 4.0);
}

TEST_CASE("canonical form is independent of child order", "[treekit]") {
  const Tree t1 = parse_newick("(B:1,A:1);");
  const Tree t2 = parse_newick("(A:1,B:1);");
  CHECK(write_newick(t1) == write_newick(t2));

  const Tree q1 = parse_newick("((D:1,C:2):3,(B:4,A:5):6);");
  const Tree q2 = parse_newick("((A:5,B:4):6,(C:2,D:1):3);");
  CHECK(write_newick(q1) == write_newick(q2));
}

TEST_CASE("round trip through the canonical writer is stable", "[treekit]") {
  for (int seed = 0; seed < 25; ++seed) {
    Tree t = random_topology(4 + seed % 9, seed);
    t = sample_edge_lengths(t, 0.05, 0.2, 1000 + seed);
    const std::string s = write_newick(t);
    CHECK(write_newick(parse_newick(s)) == s);
  }
}

TEST_CASE("balanced tree serialises with all lengths 0.250000", "[treekit]") {
  const std::string s = write_newick(testutil::balanced8(0.25));
  CHECK(s ==
        "(((1:0.250000,2:0.250000):0.250000,(3:0.250000,4:0.250000):0.250000)"
        ":0.250000,((5:0.250000,6:0.250000):0.250000,(7:0.250000,8:0.250000)"
        ":0.250000):0.250000);");
}

TEST_CASE("parse errors carry the byte offset", "[treekit]") {
  try {
    parse_newick("(A:1;");
    FAIL("expected newick_error");
  } catch (const newick_error& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse_newick("no parens"), newick_error);
  CHECK_THROWS_AS(parse_newick("(A:1,B:1)"), newick_error);
  CHECK_THROWS_AS(parse_newick("(A:1,B:1); junk"), newick_error);
  CHECK_THROWS_AS(parse_newick("(A:1,A:1);"), std::invalid_argument);
  CHECK_THROWS_AS(parse_newick("(A:-1,B:1);"), std::invalid_argument);
}

TEST_CASE("leaf distances on the balanced tree", "[treekit]") {
  const DistanceMatrix dm = leaf_distances(testutil::balanced8(0.25));
  const double expected[8] = {0.0, 0.5, 1.0, 1.0, 1.5, 1.5, 1.5, 1.5};
  for (int j = 0; j < 8; ++j) CHECK(dm.d(0, j) == expected[j]);
}

TEST_CASE("star tree distances", "[treekit]") {
  const Tree t = parse_newick("(a:0.125,b:0.125,c:0.125,d:0.125);");
  const DistanceMatrix dm = leaf_distances(t);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(dm.d(i, j) == (i == j ? 0.0 : 0.25));
}

TEST_CASE("random topology counting invariants", "[treekit]") {
  for (int n : {3, 4, 7, 12}) {
    const Tree t = random_topology(n, 17 * n);
    CHECK(t.n_leaves() == n);
    CHECK(t.n_nodes() - t.n_leaves() == n - 2);
    CHECK(t.n_edges() == 2 * n - 3);
    for (int v = 0; v < t.n_nodes(); ++v) {
      const auto& nd = t.nodes[v];
      const int degree = static_cast<int>(nd.children.size()) + (v == t.root ? 0 : 1);
      CHECK((nd.is_leaf() ? degree == 1 : degree == 3));
    }
  }
}

TEST_CASE("three leaves have a unique topology", "[treekit]") {
  const Tree t = random_topology(3, 5);
  CHECK(write_newick(t) == "(t1:0.000000,t2:0.000000,t3:0.000000);");
}

TEST_CASE("four-leaf topologies are uniform", "[treekit]") {
  std::map<std::string, int> counts;
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed)
    ++counts[write_newick(random_topology(4, seed))];
  REQUIRE(counts.size() == 3);
  for (const auto& [topo, count] : counts)
    CHECK_THAT(static_cast<double>(count) / trials, WithinAbs(1.0 / 3.0, 0.02));
}

TEST_CASE("edge length sampling", "[treekit]") {
  const Tree topo = random_topology(12, 3);
  const Tree fixed = sample_edge_lengths(topo, 0.25, 0.25, 9);
  for (int v = 0; v < fixed.n_nodes(); ++v)
    if (v != fixed.root) CHECK(fixed.nodes[v].length == 0.25);

  CHECK_THROWS_AS(sample_edge_lengths(topo, 0.3, 0.1, 1), std::domain_error);
  CHECK_THROWS_AS(sample_edge_lengths(topo, -0.1, 0.1, 1), std::domain_error);

  // moment check over many draws
  double sum = 0.0;
  long count = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const Tree t = sample_edge_lengths(topo, 0.05, 0.2, seed);
    for (int v = 0; v < t.n_nodes(); ++v)
      if (v != t.root) {
        sum += t.nodes[v].length;
        ++count;
      }
  }
  const double mean = sum / count;
  const double sigma = (0.2 - 0.05) / std::sqrt(12.0) / std::sqrt(count);
  CHECK_THAT(mean, WithinAbs(0.125, 3.0 * sigma));
}

TEST_CASE("neighbor joining recovers the balanced tree", "[treekit]") {
  const Tree fig = testutil::balanced8(0.25);
  const Tree nj = neighbor_joining(leaf_distances(fig));
  CHECK(rf_distance(nj, fig) == 0);
}

TEST_CASE("neighbor joining three-point formulas", "[treekit]") {
  DistanceMatrix dm;
  dm.labels = {"a", "b", "c"};
  dm.d = Eigen::MatrixXd::Zero(3, 3);
  dm.d(0, 1) = dm.d(1, 0) = 5.0;
  dm.d(0, 2) = dm.d(2, 0) = 6.0;
  dm.d(1, 2) = dm.d(2, 1) = 7.0;
  const Tree t = neighbor_joining(dm);
  std::map<std::string, double> lengths;
  for (const auto& nd : t.nodes)
    if (nd.is_leaf()) lengths[nd.label] = nd.length;
  CHECK_THAT(lengths["a"], WithinAbs(2.0, 1e-12));
  CHECK_THAT(lengths["b"], WithinAbs(3.0, 1e-12));
  CHECK_THAT(lengths["c"], WithinAbs(4.0, 1e-12));
}

TEST_CASE("neighbor joining is consistent on additive metrics", "[treekit]") {
  for (int seed = 0; seed < 30; ++seed) {
    Tree t = random_topology(10, seed);
    t = sample_edge_lengths(t, 0.05, 0.2, 500 + seed);
    const DistanceMatrix dm = leaf_distances(t);
    const Tree recovered = neighbor_joining(dm);
    CHECK(rf_distance(recovered, t) == 0);
    const DistanceMatrix back = leaf_distances(recovered);
    CHECK((back.d - dm.d).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("neighbor joining rejects tiny inputs", "[treekit]") {
  DistanceMatrix dm;
  dm.labels = {"a", "b"};
  dm.d = Eigen::MatrixXd::Zero(2, 2);
  dm.d(0, 1) = dm.d(1, 0) = 1.0;
  CHECK_THROWS_AS(neighbor_joining(dm), std::domain_error);
}

TEST_CASE("midpoint rooting halves a two-leaf tree", "[treekit]") {
  const Tree t = midpoint_root(parse_newick("(A:1.5,B:0.5);"));
  CHECK(t.rooted);
  CHECK(write_newick(t) == "(A:1.000000,B:1.000000);");
}

TEST_CASE("midpoint rooting centres the balanced tree", "[treekit]") {
  // the diameter is 1.5; its midpoint is the centre of the 0.5-long central
  // path, i.e. the unrooted tree's natural centre
  const Tree rooted = midpoint_root(testutil::balanced8(0.25));
  CHECK(rooted.rooted);
  const auto& root = rooted.nodes[rooted.root];
  REQUIRE(root.children.size() == 2);
  const DistanceMatrix dm = leaf_distances(rooted);
  CHECK(dm.d == leaf_distances(testutil::balanced8(0.25)).d);
  // both root children sit 0.25 away (the split lands mid central edge)
  for (int c : root.children) CHECK_THAT(rooted.nodes[c].length, WithinAbs(0.25, 1e-12));
}

TEST_CASE("suppressing the midpoint root recovers the input", "[treekit]") {
  for (int seed = 0; seed < 20; ++seed) {
    Tree t = random_topology(4 + seed % 8, seed);
    t = sample_edge_lengths(t, 0.05, 0.2, 900 + seed);
    const Tree rooted = midpoint_root(t);
    CHECK(rooted.rooted);
    const Tree back = suppress_root(rooted);
    CHECK(write_newick(back) == write_newick(t));
  }
}

TEST_CASE("robinson-foulds distance basics", "[treekit]") {
  const Tree t = parse_newick("((A:1,B:1):1,(C:1,D:1):1);");
  CHECK(rf_distance(t, t) == 0);
  const Tree other = parse_newick("((A:1,C:1):1,(B:1,D:1):1);");
  CHECK(rf_distance(t, other) == 2);

  const Tree t5a = parse_newick("(((A:1,B:1):1,C:1):1,D:1,E:1);");
  const Tree t5b = parse_newick("(((A:1,C:1):1,E:1):1,B:1,D:1);");
  CHECK(rf_distance(t5a, t5b) == 2 * (5 - 3));

  const Tree other_labels = parse_newick("((A:1,B:1):1,(C:1,X:1):1);");
  CHECK_THROWS_AS(rf_distance(t, other_labels), std::domain_error);
}

TEST_CASE("robinson-foulds is a metric on topologies", "[treekit]") {
  std::vector<Tree> trees;
  for (int seed = 0; seed < 9; ++seed) {
    Tree t = random_topology(8, 40 + seed);
    trees.push_back(sample_edge_lengths(t, 0.05, 0.2, 140 + seed));
  }
  for (const auto& a : trees)
    for (const auto& b : trees)
      for (const auto& c : trees) {
        CHECK(rf_distance(a, b) == rf_distance(b, a));
        CHECK(rf_distance(a, c) <= rf_distance(a, b) + rf_distance(b, c));
        if (write_newick(a) == write_newick(b)) CHECK(rf_distance(a, b) == 0);
      }
  // zero iff identical split sets: rooting does not change the splits
  const Tree rooted = midpoint_root(trees[0]);
  CHECK(rf_distance(rooted, trees[0]) == 0);
}

TEST_CASE("branch tuning on a two-leaf tree matches the ml distance", "[treekit]") {
  Tree t = parse_newick("(a:0.05,b:0.05);");
  const Alignment a = simulate_alignment(parse_newick("(a:0.2,b:0.15);"), 2000, 21);
  const double r = diff_rates(a).rates(0, 1);
  const BranchOptResult res = optimize_branch_lengths(t, a);
  const double total = res.tree.nodes[1].length + res.tree.nodes[2].length;
  CHECK_THAT(total, WithinAbs(ml_pairwise_distance(r), 1e-4));
}

TEST_CASE("branch tuning is a fixed point at the optimum and never descends",
          "[treekit]") {
  Tree topo = random_topology(6, 321);
  topo = sample_edge_lengths(topo, 0.05, 0.2, 322);
  const Alignment a = simulate_alignment(topo, 400, 323);

  const double initial = tree_loglik(topo, a);
  const BranchOptResult first = optimize_branch_lengths(topo, a);
  CHECK(first.loglik >= initial);

  const BranchOptResult second = optimize_branch_lengths(first.tree, a);
  CHECK(second.sweeps == 1);
  CHECK(second.loglik >= first.loglik);
  CHECK(second.loglik - first.loglik < 1e-3);
}
