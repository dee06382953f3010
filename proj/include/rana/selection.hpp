#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rana/features.hpp"
#include "rana/influence.hpp"
#include "rana/labels.hpp"

namespace rana {

struct SelectionConfig {
  double theta = 0.05;       // activation threshold
  double gamma = 0.01;       // minimum acceptable model confidence
  int budget = 100;          // oracle queries per run
  int batch = 10;            // pairs per round
  int cand_k = 5;            // targets per source in the candidate pool
  double oracle_conf = 0.8;  // C^orc, the oracle accuracy

  void validate() const {
    if (!(theta >= 0.0)) throw ParameterError("theta must be >= 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
    if (!(oracle_conf > 0.0 && oracle_conf <= 1.0)) throw ParameterError("oracle confidence must lie in (0, 1]");
    if (!(gamma < oracle_conf)) throw ParameterError("gamma must be below the oracle confidence");
    if (budget < 0) throw ParameterError("budget must be >= 0");
    if (batch < 1) throw ParameterError("batch must be >= 1");
    if (budget > 0 && batch > budget) throw ParameterError("batch must not exceed the budget");
    if (cand_k < 1) throw ParameterError("cand_k must be >= 1");
  }
};

struct CandidatePair {
  NodeId i = 0;
  NodeId j = 0;
  double cs = 0.0;        // cleanliness
  double cm = 0.0;        // model confidence Acc * p_ij
  double sel_conf = 0.0;  // confidence used for ranking before labeling
  std::optional<double> post_conf;

  NodePair pair() const noexcept { return {i, j}; }
};

/// Fixed-size bitset over source nodes and target nodes.
class ActivationSet {
 public:
  ActivationSet() = default;
  ActivationSet(NodeId source_nodes, NodeId target_nodes)
      : src_(words(source_nodes), 0), tgt_(words(target_nodes), 0) {}

  void add_source(NodeId v) { set(src_, v); }
  void add_target(NodeId u) { set(tgt_, u); }
  bool has_source(NodeId v) const { return test(src_, v); }
  bool has_target(NodeId u) const { return test(tgt_, u); }

  std::size_t count() const noexcept { return popcount(src_) + popcount(tgt_); }

  /// |this \ covered|
  std::size_t gain_over(const ActivationSet& covered) const {
    return diff_count(src_, covered.src_) + diff_count(tgt_, covered.tgt_);
  }

  void merge(const ActivationSet& other) {
    for (std::size_t w = 0; w < src_.size() && w < other.src_.size(); ++w) src_[w] |= other.src_[w];
    for (std::size_t w = 0; w < tgt_.size() && w < other.tgt_.size(); ++w) tgt_[w] |= other.tgt_[w];
  }

  bool subset_of(const ActivationSet& other) const { return gain_over(other) == 0; }

  friend bool operator==(const ActivationSet&, const ActivationSet&) = default;

 private:
  static std::size_t words(NodeId n) { return static_cast<std::size_t>((n + 63) / 64); }
  static void set(std::vector<std::uint64_t>& bits, NodeId v) {
    bits.at(static_cast<std::size_t>(v) / 64) |= std::uint64_t{1} << (static_cast<std::size_t>(v) % 64);
  }
  static bool test(const std::vector<std::uint64_t>& bits, NodeId v) {
    const auto w = static_cast<std::size_t>(v) / 64;
    return w < bits.size() && ((bits[w] >> (static_cast<std::size_t>(v) % 64)) & 1u);
  }
  static std::size_t popcount(const std::vector<std::uint64_t>& bits) {
    std::size_t c = 0;
    for (auto w : bits) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  static std::size_t diff_count(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::size_t c = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
      c += static_cast<std::size_t>(std::popcount(w < b.size() ? a[w] & ~b[w] : a[w]));
    }
    return c;
  }

  std::vector<std::uint64_t> src_;
  std::vector<std::uint64_t> tgt_;
};

/// Mean clamped cosine similarity between each node and its neighbours; 0 for
/// isolated nodes.
inline std::vector<double> node_cleanliness(const Graph& graph, const Eigen::MatrixXd& features) {
  if (features.rows() != graph.node_count()) throw DimensionError("feature rows != node count");
  const Eigen::MatrixXd unit = unit_rows(features);
  std::vector<double> out(static_cast<std::size_t>(graph.node_count()), 0.0);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    auto nb = graph.neighbors(v);
    if (nb.empty()) continue;
    double sum = 0.0;
    for (NodeId m : nb) sum += unit.row(v).dot(unit.row(m));
    out[static_cast<std::size_t>(v)] = std::clamp(sum / static_cast<double>(nb.size()), 0.0, 1.0);
  }
  return out;
}

inline std::vector<double> node_cleanliness(const Graph& graph) {
  return node_cleanliness(graph, feature_matrix(graph));
}

/// Pair cleanliness from precomputed per-node scores.
inline double cleanliness_score(NodeId i, NodeId j, const std::vector<double>& source_clean,
                                const std::vector<double>& target_clean) {
  return 0.5 * (source_clean.at(static_cast<std::size_t>(i)) + target_clean.at(static_cast<std::size_t>(j)));
}

inline double cleanliness_score(NodePair pair, const Graph& source, const Graph& target) {
  return cleanliness_score(pair.source, pair.target, node_cleanliness(source), node_cleanliness(target));
}

inline double model_confidence(double acc, double p) { return acc * p; }

/// Band for a model confidence against the oracle: high at or above C^orc,
/// low at or below gamma.
inline Region confidence_region(double cm, const SelectionConfig& cfg) {
  if (cm >= cfg.oracle_conf) return Region::high;
  if (cm > cfg.gamma) return Region::moderate;
  return Region::low;
}

/// Probability both annotators are right given that they agree.
inline double agreement_posterior(double c_orc, double c_m) {
  const double both_right = c_orc * c_m;
  const double both_wrong = (1.0 - c_orc) * (1.0 - c_m);
  const double agree = both_right + both_wrong;
  // One annotator certain and the other certainly wrong cannot agree.
  if (agree <= 0.0) return 0.5;
  return both_right / agree;
}

/// Confidence used to rank a pair before it is labeled. The moderate band
/// assumes the agreement outcome since no oracle answer exists yet.
inline double selection_confidence(const CandidatePair& c, const SelectionConfig& cfg) {
  switch (confidence_region(c.cm, cfg)) {
    case Region::high: return c.cm;
    case Region::moderate: return agreement_posterior(cfg.oracle_conf, c.cm);
    case Region::low: return std::min(c.cs, cfg.oracle_conf);
  }
  return 0.0;
}

/// Moderate-band reliability of a labeled pair from the oracle answer, the
/// model label and (on disagreement) the twin pair's answer.
inline double posterior_confidence(int y, int y_hat, std::optional<int> y_twin, double cm,
                                   const SelectionConfig& cfg) {
  const double c_orc = cfg.oracle_conf;
  if (y == y_hat) return agreement_posterior(c_orc, cm);
  if (!y_twin) throw ContractError("disagreeing labels need the twin pair's label");
  if (c_orc * cm >= 1.0 - 1e-12) return 1.0;
  const double disagree = 1.0 - c_orc * cm;
  if (*y_twin == y) return c_orc * (1.0 - cm) / disagree;
  return cm * (1.0 - c_orc) / disagree;
}

/// Nodes whose confidence-weighted influence from either end reaches theta.
inline ActivationSet activated_nodes(const CandidatePair& c, const InfluenceField& source_field,
                                     const InfluenceField& target_field, const SelectionConfig& cfg) {
  ActivationSet out(source_field.node_count(), target_field.node_count());
  for (const auto& e : source_field.row(c.i)) {
    if (c.sel_conf * e.value >= cfg.theta) out.add_source(e.node);
  }
  for (const auto& e : target_field.row(c.j)) {
    if (c.sel_conf * e.value >= cfg.theta) out.add_target(e.node);
  }
  return out;
}

struct SelectionResult {
  std::vector<CandidatePair> batch;
  std::vector<std::size_t> gains;  // marginal coverage gain of each pick
  ActivationSet covered;           // coverage after the batch
  bool short_batch = false;        // pool ran out before `batch` picks
};

/// Greedy budgeted coverage maximization with lazy re-evaluation. Ties go to
/// the higher selection confidence, then the lower (i, j).
inline SelectionResult greedy_select(const std::vector<CandidatePair>& candidates, const InfluenceField& source_field,
                                     const InfluenceField& target_field, const SelectionConfig& cfg,
                                     ActivationSet already_covered) {
  if (cfg.batch < 1) throw ParameterError("batch must be >= 1");
  SelectionResult result;
  result.covered = std::move(already_covered);
  if (result.covered.count() == 0 && result.covered == ActivationSet{}) {
    result.covered = ActivationSet(source_field.node_count(), target_field.node_count());
  }

  std::vector<ActivationSet> sigma;
  sigma.reserve(candidates.size());
  for (const auto& c : candidates) sigma.push_back(activated_nodes(c, source_field, target_field, cfg));

  // Heap key: (gain, sel_conf, -i, -j). Stale gains are upper bounds because
  // coverage gain only shrinks as `covered` grows.
  struct Entry {
    std::size_t gain;
    std::size_t idx;
    int round;
  };
  auto key = [&](const Entry& e) {
    const auto& c = candidates[e.idx];
    return std::make_tuple(e.gain, c.sel_conf, -c.i, -c.j);
  };
  auto less = [&](const Entry& a, const Entry& b) { return key(a) < key(b); };
  std::priority_queue<Entry, std::vector<Entry>, decltype(less)> heap(less);
  for (std::size_t k = 0; k < candidates.size(); ++k) heap.push({sigma[k].gain_over(result.covered), k, 0});

  for (int round = 0; round < cfg.batch; ++round) {
    std::optional<Entry> pick;
    while (!heap.empty()) {
      Entry top = heap.top();
      heap.pop();
      if (top.round != round) {
        top.gain = sigma[top.idx].gain_over(result.covered);
        top.round = round;
      }
      if (heap.empty() || !less(top, heap.top())) {
        pick = top;
        break;
      }
      heap.push(top);
    }
    if (!pick) {
      result.short_batch = true;
      break;
    }
    result.batch.push_back(candidates[pick->idx]);
    result.gains.push_back(pick->gain);
    result.covered.merge(sigma[pick->idx]);
  }
  return result;
}

}  // namespace rana
