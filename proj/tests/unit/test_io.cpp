#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hyptree/embedding.hpp"
#include "hyptree/io.hpp"
#include "hyptree/tree.hpp"
#include "test_helpers.hpp"

using namespace hyptree;

TEST_CASE("distance matrix csv round trip is exact", "[io]") {
  Tree t = random_topology(7, 2);
  t = sample_edge_lengths(t, 0.05, 0.2, 3);
  const DistanceMatrix dm = leaf_distances(t);

  std::stringstream ss;
  write_distance_csv(ss, dm);
  const DistanceMatrix back = read_distance_csv(ss);
  CHECK(back.labels == dm.labels);
  CHECK(back.d == dm.d);
}

TEST_CASE("configuration csv round trip is exact", "[io]") {
  Tree t = random_topology(6, 5);
  t = sample_edge_lengths(t, 0.05, 0.2, 6);
  const PointConfiguration config = embed_tree(midpoint_root(t), {4, 0.5, 7});

  std::stringstream ss;
  write_config_csv(ss, config);
  const PointConfiguration back = read_config_csv(ss);
  CHECK(back.labels == config.labels);
  REQUIRE(back.size() == config.size());
  for (int i = 0; i < config.size(); ++i) {
    CHECK(back.points[i].coords == config.points[i].coords);
    CHECK(back.points[i].rho == config.points[i].rho);
  }
}

TEST_CASE("malformed csv input is rejected", "[io]") {
  std::stringstream empty;
  CHECK_THROWS_AS(read_distance_csv(empty), std::invalid_argument);

  std::stringstream bad_header("x,A,B\nA,0,1\nB,1,0\n");
  CHECK_THROWS_AS(read_distance_csv(bad_header), std::invalid_argument);

  std::stringstream bad_row("label,A,B\nA,0,1\nB,oops,0\n");
  CHECK_THROWS_AS(read_distance_csv(bad_row), std::invalid_argument);

  std::stringstream asym("label,A,B\nA,0,1\nB,2,0\n");
  CHECK_THROWS_AS(read_distance_csv(asym), std::invalid_argument);
}

TEST_CASE("fasta round trip with wrapping", "[io]") {
  Tree t = random_topology(5, 8);
  t = sample_edge_lengths(t, 0.05, 0.2, 9);
  const Alignment a = simulate_alignment(t, 143, 10);

  std::stringstream ss;
  write_fasta(ss, a, 60);
  const Alignment back = read_fasta(ss);
  CHECK(back.taxa == a.taxa);
  CHECK(back.sequences == a.sequences);
}

TEST_CASE("trace records serialise optional fields as null", "[io]") {
  TraceRecord rec;
  rec.iteration = 20;
  rec.objective = -12.5;
  rec.max_step_taken = 0.01;
  std::stringstream ss;
  write_trace_record(ss, rec);
  const auto j = nlohmann::json::parse(ss.str());
  CHECK(j["iteration"] == 20);
  CHECK(j["objective"] == -12.5);
  CHECK(j["rf"].is_null());
  CHECK(j["tree_loglik"].is_null());

  rec.rf_to_reference = 4;
  rec.tree_loglik = -1234.5;
  std::stringstream ss2;
  write_trace_record(ss2, rec);
  const auto j2 = nlohmann::json::parse(ss2.str());
  CHECK(j2["rf"] == 4);
  CHECK(j2["tree_loglik"] == -1234.5);
}

TEST_CASE("study rows satisfy their defining identities when written", "[io]") {
  StudyRow row;
  row.kind = "taxa";
  row.grid_value = 10;
  row.method = "hyperbolic";
  row.rf_distance = 0;
  row.topology_match = true;
  row.loglik_inferred = -100.5;
  row.loglik_generating = -101.0;
  row.loglik_success = true;
  std::stringstream ss;
  write_study_row(ss, row);
  CHECK(ss.str() ==
        "taxa,10,0,0,hyperbolic,0,1,-100.5,-101,1,0,ok\n");
}
