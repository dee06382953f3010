#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include "oracles.hpp"
#include "rana/influence.hpp"

using namespace rana;
using Catch::Matchers::WithinAbs;

namespace {

double lookup(const InfluenceField& f, NodeId i, NodeId m) {
  for (const auto& e : f.row(i)) {
    if (e.node == m) return e.value;
  }
  return 0.0;
}

Eigen::MatrixXd dense(const InfluenceField& f) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.node_count(), f.node_count());
  for (NodeId i = 0; i < f.node_count(); ++i) {
    for (const auto& e : f.row(i)) out(i, e.node) = e.value;
  }
  return out;
}

}  // namespace

TEST_CASE("k = 0 influence is the identity", "[influence]") {
  const auto f = compute_influence(oracle::cycle_graph(5), 0, 1e-4);
  for (NodeId i = 0; i < 5; ++i) {
    REQUIRE(f.row(i).size() == 1);
    CHECK(f.row(i)[0].node == i);
    CHECK(f.row(i)[0].value == 1.0);
  }
}

TEST_CASE("three-node star, one step", "[influence]") {
  const auto star = oracle::star_graph(2);  // centre 0, leaves 1 and 2
  CHECK(oracle::walk_probability(star, 1, 0, 1) == 1.0);
  CHECK(oracle::walk_probability(star, 2, 0, 1) == 1.0);
  CHECK(oracle::walk_probability(star, 0, 0, 1) == 0.0);
  const auto f = compute_influence(star, 1, 0.0);
  CHECK(lookup(f, 1, 0) == 0.5);
  CHECK(lookup(f, 2, 0) == 0.5);
  CHECK(lookup(f, 0, 0) == 0.0);
}

TEST_CASE("five-node cycle, two steps, matches path enumeration", "[influence]") {
  const auto c5 = oracle::cycle_graph(5);
  const auto expect = oracle::influence_by_paths(c5, 2);
  const auto got = dense(compute_influence(c5, 2, 0.0));
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("influence matches path enumeration on small random graphs", "[influence]") {
  std::mt19937_64 gen(99);
  for (int t = 0; t < 40; ++t) {
    const NodeId n = 2 + static_cast<NodeId>(gen() % 7);
    const auto g = oracle::random_graph(n, 0.4, gen);
    for (int k = 0; k <= 3; ++k) {
      const auto got = dense(compute_influence(g, k, 0.0));
      CHECK((got - oracle::influence_by_paths(g, k)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("pre-truncation columns sum to one", "[influence]") {
  std::mt19937_64 gen(8);
  const auto g = oracle::random_graph(30, 0.12, gen);
  const auto f = dense(compute_influence(g, 2, 0.0));
  for (NodeId m = 0; m < 30; ++m) {
    const double s = f.col(m).sum();
    if (s > 0.0) CHECK_THAT(s, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("truncation drops small entries only", "[influence]") {
  std::mt19937_64 gen(12);
  const auto g = oracle::random_graph(40, 0.1, gen);
  const double eps = 0.02;
  const auto full = dense(compute_influence(g, 2, 0.0));
  const auto cut = compute_influence(g, 2, eps);
  for (NodeId i = 0; i < 40; ++i) {
    for (const auto& e : cut.row(i)) {
      CHECK(e.value > eps);
      CHECK(e.value == full(i, e.node));
    }
    for (NodeId m = 0; m < 40; ++m) {
      if (full(i, m) > eps) CHECK(lookup(cut, i, m) == full(i, m));
    }
  }
}

TEST_CASE("isolated nodes influence nothing", "[influence]") {
  const auto g = Graph::from_edges(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});
  for (int k = 1; k <= 3; ++k) CHECK(influence_row(compute_influence(g, k, 1e-4), 2).empty());
}

TEST_CASE("no influence beyond k hops", "[influence]") {
  const auto p = oracle::path_graph(6);
  const auto f = compute_influence(p, 2, 0.0);
  CHECK(lookup(f, 0, 3) == 0.0);
  CHECK(lookup(f, 0, 5) == 0.0);
  CHECK(lookup(f, 0, 2) > 0.0);
}

TEST_CASE("automorphic nodes have permutation-identical rows", "[influence]") {
  const auto star = oracle::star_graph(4);
  const auto f = compute_influence(star, 2, 1e-4);
  // Leaves 1 and 2 swap under the automorphism exchanging them.
  CHECK_THAT(lookup(f, 1, 1), WithinAbs(lookup(f, 2, 2), 1e-15));
  CHECK_THAT(lookup(f, 1, 2), WithinAbs(lookup(f, 2, 1), 1e-15));
  CHECK_THAT(lookup(f, 1, 3), WithinAbs(lookup(f, 2, 3), 1e-15));
}

TEST_CASE("influence_row bounds and parameters", "[influence]") {
  const auto f = compute_influence(oracle::cycle_graph(4), 1, 1e-4);
  CHECK_THROWS_AS(influence_row(f, 4), BoundsError);
  CHECK_THROWS_AS(influence_row(f, -1), BoundsError);
  CHECK_THROWS_AS(compute_influence(oracle::cycle_graph(4), -1, 1e-4), ParameterError);
  CHECK_THROWS_AS(compute_influence(oracle::cycle_graph(4), 1, -1.0), ParameterError);
  CHECK(f.depth() == 1);
  CHECK(f.trunc_eps() == 1e-4);
}
