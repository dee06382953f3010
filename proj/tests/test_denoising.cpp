#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "rana/denoising.hpp"

using namespace rana;
using Catch::Matchers::WithinAbs;

namespace {

/// 8-node random graph with attributes, paired with an identical copy.
NetworkPair twin_world(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  const NodeId n = 8;
  auto g = oracle::random_graph(n, 0.4, gen);
  Eigen::MatrixXd x(n, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = z(gen);
  g = g.with_attributes(x);
  std::vector<NodePair> gt;
  for (NodeId v = 0; v < n; ++v) gt.push_back({v, v});
  return NetworkPair(g, g, gt);
}

/// Diagonal scores, flat probabilities.
ModelState flat_state(NodeId n, double acc) {
  ModelState st;
  st.scores = Eigen::MatrixXd::Identity(n, n);
  st.prob = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  st.acc = acc;
  return st;
}

CandidatePair cand(NodeId i, NodeId j, double cs = 0.6) {
  CandidatePair c;
  c.i = i;
  c.j = j;
  c.cs = cs;
  return c;
}

SelectionConfig fusion_cfg() {
  SelectionConfig cfg;
  cfg.oracle_conf = 0.8;
  cfg.gamma = 0.01;
  return cfg;
}

double ref_distance(const Eigen::MatrixXd& fs, const Eigen::MatrixXd& ft, NodePair a, NodePair b) {
  auto dist = [](const Eigen::MatrixXd& f, NodeId u, NodeId v) {
    const double nu = std::sqrt(f.row(u).squaredNorm());
    const double nv = std::sqrt(f.row(v).squaredNorm());
    if (nu == 0.0 || nv == 0.0) return 1.0;
    double dot = 0.0;
    for (Eigen::Index c = 0; c < f.cols(); ++c) dot += f(u, c) * f(v, c);
    return 1.0 - dot / (nu * nv);
  };
  return dist(fs, a.source, b.source) + dist(ft, a.target, b.target);
}

}  // namespace

TEST_CASE("fusion regions partition the confidence range", "[fusion]") {
  CHECK(fusion_region(0.85, 0.8, 0.01) == Region::high);
  CHECK(fusion_region(0.8, 0.8, 0.01) == Region::moderate);
  CHECK(fusion_region(0.5, 0.8, 0.01) == Region::moderate);
  CHECK(fusion_region(0.01, 0.8, 0.01) == Region::low);
  CHECK(fusion_region(0.0, 0.8, 0.01) == Region::low);
  for (int k = 0; k <= 1000; ++k) {
    const double cm = k / 1000.0;
    const auto r = fusion_region(cm, 0.8, 0.01);
    CHECK((r == Region::high) == (cm > 0.8));
    CHECK((r == Region::low) == (cm <= 0.01));
  }
}

TEST_CASE("model_assisted_label gates on alpha", "[fusion]") {
  auto st = flat_state(4, 1.0);
  st.prob(1, 1) = 0.9;
  st.prob(1, 2) = 0.5;
  CHECK(model_assisted_label(st, 1, 1, 0.8) == 1);
  CHECK_FALSE(model_assisted_label(st, 1, 2, 0.8).has_value());
  st.scores(2, 3) = 5.0;
  st.prob(2, 0) = 0.95;
  CHECK(model_assisted_label(st, 2, 0, 0.8) == 0);
}

TEST_CASE("twin lookup matches a brute-force scan", "[twin]") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto world = twin_world(seed);
    const auto feat = TwinFeatures::from(world);
    const auto a = oracle::dense_walk_matrix(world.source());
    const Eigen::MatrixXd f = oracle::matmul(a, oracle::matmul(a, world.source().attributes()));

    std::vector<NodePair> pool;
    for (NodeId i = 0; i < 8; ++i) {
      for (NodeId j = 0; j < 8; ++j) pool.push_back({i, j});
    }
    for (NodePair query : {NodePair{0, 0}, NodePair{2, 5}, NodePair{7, 1}}) {
      NodePair best{-1, -1};
      double best_d = 0.0;
      for (const auto& q : pool) {
        if (q == query) continue;
        const double d = ref_distance(f, f, q, query);
        if (best.source < 0 || d < best_d - 1e-12) {
          best = q;
          best_d = d;
        }
      }
      const auto got = find_twin_pair(query, feat, pool);
      CHECK_THAT(got.distance, WithinAbs(best_d, 1e-12));
      CHECK_THAT(ref_distance(f, f, got.pair, query), WithinAbs(best_d, 1e-12));
    }
  }
}

TEST_CASE("twin lookup ignores pool order", "[twin]") {
  const auto world = twin_world(3);
  const auto feat = TwinFeatures::from(world);
  std::vector<NodePair> pool;
  for (NodeId i = 0; i < 8; ++i) {
    for (NodeId j = 0; j < 8; ++j) pool.push_back({i, j});
  }
  const auto ref = find_twin_pair({4, 6}, feat, pool);
  std::mt19937_64 gen(1);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(pool.begin(), pool.end(), gen);
    const auto got = find_twin_pair({4, 6}, feat, pool);
    CHECK(got.pair == ref.pair);
    CHECK(got.distance == ref.distance);
  }
}

TEST_CASE("twin ties go to the smaller pair and the pair itself is skipped", "[twin]") {
  // Every row identical: all distances tie at zero.
  TwinFeatures feat{Eigen::MatrixXd::Ones(3, 2) / std::sqrt(2.0), Eigen::MatrixXd::Ones(3, 2) / std::sqrt(2.0)};
  const std::vector<NodePair> pool{{2, 2}, {1, 0}, {0, 0}, {1, 2}};
  CHECK(find_twin_pair({0, 0}, feat, pool).pair == NodePair{1, 0});
  CHECK(find_twin_pair({2, 1}, feat, pool).pair == NodePair{0, 0});
  CHECK_THROWS_AS(find_twin_pair({0, 0}, feat, std::vector<NodePair>{{0, 0}}), LookupError);
}

TEST_CASE("high band uses the model label without a query", "[fusion]") {
  const auto world = twin_world(1);
  const auto feat = TwinFeatures::from(world);
  auto st = flat_state(8, 1.0);
  st.prob(2, 2) = 0.9;
  Oracle o(world, 1.0, 1, 10);
  CandidatePool pool(std::vector<NodePair>{{2, 2}, {3, 3}});
  auto c = cand(2, 2);
  const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
  CHECK(out.label.label == 1);
  CHECK(out.label.provenance == Provenance::model);
  CHECK(out.label.region == Region::high);
  CHECK_THAT(out.label.confidence, WithinAbs(0.9, 1e-15));
  CHECK(out.queries == 0);
  CHECK(o.queries_used() == 0);
  CHECK_FALSE(pool.contains({2, 2}));
  CHECK(c.post_conf == out.label.confidence);
}

TEST_CASE("low band trusts the oracle up to cleanliness", "[fusion]") {
  const auto world = twin_world(1);
  const auto feat = TwinFeatures::from(world);
  auto st = flat_state(8, 0.5);
  st.prob(1, 4) = 0.01;
  Oracle o(world, 1.0, 1, 10);
  CandidatePool pool(std::vector<NodePair>{{1, 4}});
  auto c = cand(1, 4, 0.6);
  auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
  CHECK(out.label.label == 0);
  CHECK(out.label.provenance == Provenance::oracle);
  CHECK(out.label.region == Region::low);
  CHECK(out.label.confidence == 0.6);
  CHECK(out.queries == 1);

  auto c2 = cand(1, 5, 0.95);
  st.prob(1, 5) = 0.001;
  out = fuse_labels(c2, st, o, fusion_cfg(), pool, feat);
  CHECK(out.label.confidence == 0.8);
}

TEST_CASE("moderate agreement keeps the oracle label", "[fusion]") {
  const auto world = twin_world(1);
  const auto feat = TwinFeatures::from(world);
  auto st = flat_state(8, 1.0);
  st.prob(0, 0) = 0.7;
  Oracle o(world, 1.0, 1, 10);
  CandidatePool pool(std::vector<NodePair>{{0, 0}, {5, 5}});
  auto c = cand(0, 0);
  const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
  CHECK(out.label.label == 1);
  CHECK(out.label.provenance == Provenance::oracle);
  CHECK(out.label.region == Region::moderate);
  CHECK_THAT(out.label.confidence, WithinAbs(0.9032, 1e-4));
  CHECK(out.queries == 1);
  CHECK_FALSE(out.twin_label);
  CHECK(pool.size() == 1);
}

TEST_CASE("moderate disagreement asks the twin", "[fusion]") {
  const auto world = twin_world(1);
  const auto feat = TwinFeatures::from(world);
  auto st = flat_state(8, 1.0);
  st.scores(0, 1) = 2.0;  // model predicts (0, 1), which is wrong
  st.prob(0, 1) = 0.7;

  SECTION("twin sides with the model") {
    Oracle o(world, 1.0, 1, 10);
    CandidatePool pool(std::vector<NodePair>{{0, 1}, {3, 3}});
    auto c = cand(0, 1);
    const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
    REQUIRE(out.label.twin);
    CHECK(out.label.twin->pair == NodePair{3, 3});
    CHECK(out.label.label == 1);
    CHECK(out.label.provenance == Provenance::twin_backed_model);
    CHECK_THAT(out.label.confidence, WithinAbs(0.7 * 0.2 / 0.44, 1e-12));
    CHECK(out.queries == 2);
    REQUIRE(out.twin_label);
    CHECK(out.twin_label->pair == NodePair{3, 3});
    CHECK(out.twin_label->label == 1);
    CHECK_FALSE(out.twin_label->region);
    CHECK(pool.empty());
  }
  SECTION("twin sides with the oracle") {
    Oracle o(world, 1.0, 1, 10);
    CandidatePool pool(std::vector<NodePair>{{0, 1}, {3, 4}});
    auto c = cand(0, 1);
    const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
    CHECK(out.label.label == 0);
    CHECK(out.label.provenance == Provenance::twin_backed_oracle);
    CHECK_THAT(out.label.confidence, WithinAbs(0.5455, 1e-4));
  }
  SECTION("no twin available") {
    Oracle o(world, 1.0, 1, 10);
    CandidatePool pool(std::vector<NodePair>{{0, 1}});
    auto c = cand(0, 1);
    const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
    CHECK(out.label.label == 0);
    CHECK(out.label.provenance == Provenance::oracle);
    CHECK(out.label.confidence == 0.8);
    CHECK_FALSE(out.budget_exhausted);
    CHECK(out.queries == 1);
  }
  SECTION("budget runs out before the twin") {
    Oracle o(world, 1.0, 1, 1);
    CandidatePool pool(std::vector<NodePair>{{0, 1}, {3, 3}});
    auto c = cand(0, 1);
    const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
    CHECK(out.label.label == 0);
    CHECK(out.budget_exhausted);
    CHECK(out.queries == 1);
    CHECK(pool.contains({3, 3}));
  }
  SECTION("no budget at all") {
    Oracle o(world, 1.0, 1, 0);
    CandidatePool pool(std::vector<NodePair>{{0, 1}, {3, 3}});
    auto c = cand(0, 1);
    CHECK_THROWS_AS(fuse_labels(c, st, o, fusion_cfg(), pool, feat), BudgetExhausted);
  }
}

TEST_CASE("a binary twin always sides with one annotator", "[fusion]") {
  const auto world = twin_world(2);
  const auto feat = TwinFeatures::from(world);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto st = flat_state(8, 1.0);
    for (NodeId i = 0; i < 8; ++i) st.prob(i, (i + 1) % 8) = 0.5;
    Oracle o(world, 0.6, seed, 20);
    std::vector<NodePair> all;
    for (NodeId i = 0; i < 8; ++i) {
      for (NodeId j = 0; j < 8; ++j) all.push_back({i, j});
    }
    CandidatePool pool(all);
    const NodeId i = static_cast<NodeId>(seed % 8);
    auto c = cand(i, (i + 1) % 8);
    const int y_hat = predicted_label(st, c.i, c.j);
    const auto out = fuse_labels(c, st, o, fusion_cfg(), pool, feat);
    const int y = o.peek(c.i, c.j);
    if (y == y_hat) {
      CHECK(out.label.provenance == Provenance::oracle);
      continue;
    }
    REQUIRE(out.label.twin);
    const int t = out.label.twin->label;
    CHECK((t == y || t == y_hat));
    CHECK(out.label.label == t);
    CHECK(out.label.provenance == (t == y ? Provenance::twin_backed_oracle : Provenance::twin_backed_model));
  }
}

TEST_CASE("label_batch tallies and skips pairs labeled as twins", "[fusion]") {
  const auto world = twin_world(1);
  const auto feat = TwinFeatures::from(world);
  auto st = flat_state(8, 1.0);
  st.scores(0, 1) = 2.0;
  st.prob(0, 1) = 0.7;  // moderate, disagrees, twin is (3, 3)
  st.prob(5, 5) = 0.9;  // high
  Oracle o(world, 1.0, 1, 10);
  CandidatePool pool(std::vector<NodePair>{{0, 1}, {3, 3}, {5, 5}, {6, 2}});
  std::vector<CandidatePair> batch{cand(0, 1), cand(3, 3), cand(5, 5), cand(6, 2)};
  st.prob(6, 2) = 0.005;
  const auto out = label_batch(batch, st, o, fusion_cfg(), pool, feat);
  REQUIRE(out.labels.size() == 4);
  CHECK(out.labels[0].pair == NodePair{0, 1});
  CHECK(out.labels[1].pair == NodePair{3, 3});
  CHECK(out.labels[2].pair == NodePair{5, 5});
  CHECK(out.labels[3].pair == NodePair{6, 2});
  CHECK(out.queries == 3);
  CHECK(out.queries == o.queries_used());
  CHECK(out.model_labels == 1);
  CHECK(out.twin_queries == 1);
  CHECK_FALSE(out.budget_exhausted);
  CHECK(pool.empty());
}

TEST_CASE("label_batch never exceeds the budget", "[fusion]") {
  const auto world = twin_world(4);
  const auto feat = TwinFeatures::from(world);
  for (int budget = 0; budget <= 6; ++budget) {
    auto st = flat_state(8, 1.0);
    std::vector<NodePair> all;
    std::vector<CandidatePair> batch;
    for (NodeId i = 0; i < 8; ++i) {
      for (NodeId j = 0; j < 8; ++j) all.push_back({i, j});
      st.scores(i, (i + 3) % 8) = 2.0;
      st.prob(i, i) = 0.4;
      batch.push_back(cand(i, i));
    }
    CandidatePool pool(all);
    Oracle o(world, 0.9, 3, budget);
    const auto out = label_batch(batch, st, o, fusion_cfg(), pool, feat);
    CHECK(out.queries == o.queries_used());
    CHECK(o.queries_used() <= budget);
    if (budget < 8) CHECK(out.budget_exhausted);
  }
}
