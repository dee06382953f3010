#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rana/alignment.hpp"
#include "rana/random.hpp"

namespace rana {

/// 1-based position of column v in row u sorted by descending score, ties
/// ordered by column index.
inline Eigen::Index rank_of(const Eigen::MatrixXd& s, NodeId u, NodeId v) {
  const double sv = s(u, v);
  Eigen::Index rank = 1;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    if (s(u, j) > sv || (j < v && s(u, j) == sv)) ++rank;
  }
  return rank;
}

/// Groundtruth pairs left after removing `exclude`; throws when none remain.
inline std::vector<NodePair> evaluation_pairs(std::span<const NodePair> groundtruth, std::span<const NodePair> exclude) {
  const std::set<NodePair> skip(exclude.begin(), exclude.end());
  std::vector<NodePair> out;
  for (const auto& p : groundtruth) {
    if (!skip.contains(p)) out.push_back(p);
  }
  if (out.empty()) throw MetricError("no groundtruth anchors left to evaluate");
  return out;
}

inline double acc_at_k(const Eigen::MatrixXd& s, std::span<const NodePair> groundtruth, int k,
                       std::span<const NodePair> exclude = {}) {
  if (k < 1) throw ParameterError("k must be >= 1");
  const auto pairs = evaluation_pairs(groundtruth, exclude);
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    if (rank_of(s, p.source, p.target) <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

inline double map_score(const Eigen::MatrixXd& s, std::span<const NodePair> groundtruth,
                        std::span<const NodePair> exclude = {}) {
  const auto pairs = evaluation_pairs(groundtruth, exclude);
  double total = 0.0;
  for (const auto& p : pairs) total += 1.0 / static_cast<double>(rank_of(s, p.source, p.target));
  return total / static_cast<double>(pairs.size());
}

struct MetricsReport {
  std::map<int, double> acc_at;  // k in {1, 5, 10}
  double map_score = 0.0;
  std::size_t evaluated_on = 0;
};

/// Acc@{1,5,10} and MAP in one pass over the ranks.
inline MetricsReport evaluate(const Eigen::MatrixXd& s, std::span<const NodePair> groundtruth,
                              std::span<const NodePair> exclude = {}) {
  const auto pairs = evaluation_pairs(groundtruth, exclude);
  MetricsReport r;
  std::size_t h1 = 0, h5 = 0, h10 = 0;
  double rr = 0.0;
  for (const auto& p : pairs) {
    const auto rank = rank_of(s, p.source, p.target);
    h1 += rank <= 1;
    h5 += rank <= 5;
    h10 += rank <= 10;
    rr += 1.0 / static_cast<double>(rank);
  }
  const auto n = static_cast<double>(pairs.size());
  r.acc_at = {{1, static_cast<double>(h1) / n}, {5, static_cast<double>(h5) / n}, {10, static_cast<double>(h10) / n}};
  r.map_score = rr / n;
  r.evaluated_on = pairs.size();
  return r;
}

enum class Strategy { rana, random, entropy, margin, least_confident };

constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::rana: return "rana";
    case Strategy::random: return "random";
    case Strategy::entropy: return "entropy";
    case Strategy::margin: return "margin";
    case Strategy::least_confident: return "least_confident";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  for (auto k : {Strategy::rana, Strategy::random, Strategy::entropy, Strategy::margin, Strategy::least_confident}) {
    if (s == to_string(k)) return k;
  }
  throw ParameterError("unknown strategy '" + std::string(s) + "'");
}

struct BaselineBatch {
  std::vector<NodePair> batch;
  bool short_batch = false;
};

/// Uncertainty score of a probability row, oriented so larger means "pick
/// first": entropy, 1 - max p, and the negated max - min spread.
inline double uncertainty_score(Strategy strategy, const Eigen::MatrixXd& prob, NodeId i,
                                std::span<const NodeId> candidates) {
  double mx = 0.0, mn = 1.0, ent = 0.0;
  for (NodeId j : candidates) {
    const double p = prob(i, j);
    mx = std::max(mx, p);
    mn = std::min(mn, p);
    if (p > 0.0) ent -= p * std::log(p);
  }
  switch (strategy) {
    case Strategy::entropy: return ent;
    case Strategy::least_confident: return 1.0 - mx;
    case Strategy::margin: return -(mx - mn);
    default: throw ParameterError("not an uncertainty strategy");
  }
}

/// Picks up to b source rows from the pool by strategy and pairs each with its
/// highest-scoring pool target. Score ties go to the lower source index.
inline BaselineBatch baseline_select(Strategy strategy, const ModelState& state, std::span<const NodePair> pool, int b,
                                     std::uint64_t seed) {
  if (b < 1) throw ParameterError("batch must be >= 1");
  if (strategy == Strategy::rana) throw ParameterError("rana is not a baseline strategy");

  std::map<NodeId, std::vector<NodeId>> rows;
  for (const auto& p : pool) rows[p.source].push_back(p.target);

  std::vector<NodeId> sources;
  for (const auto& [i, targets] : rows) sources.push_back(i);

  if (strategy == Strategy::random) {
    Rng rng(seed);
    rng.shuffle(sources);
  } else {
    std::vector<std::pair<double, NodeId>> scored;
    for (const auto& [i, targets] : rows) scored.emplace_back(uncertainty_score(strategy, state.prob, i, targets), i);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& c) { return a.first > c.first; });
    for (std::size_t k = 0; k < scored.size(); ++k) sources[k] = scored[k].second;
  }

  BaselineBatch out;
  for (NodeId i : sources) {
    if (static_cast<int>(out.batch.size()) == b) break;
    const auto& targets = rows[i];
    NodeId best = targets.front();
    for (NodeId j : targets) {
      if (state.scores(i, j) > state.scores(i, best) || (state.scores(i, j) == state.scores(i, best) && j < best)) {
        best = j;
      }
    }
    out.batch.push_back({i, best});
  }
  out.short_batch = static_cast<int>(out.batch.size()) < b;
  return out;
}

}  // namespace rana
