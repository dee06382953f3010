#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rana/alignment.hpp"
#include "rana/features.hpp"
#include "rana/labels.hpp"
#include "rana/oracle.hpp"
#include "rana/selection.hpp"

namespace rana {

/// Labeling band: high when Acc * p beats the oracle, low at or below gamma.
inline Region fusion_region(double cm, double alpha, double gamma) {
  if (cm > alpha) return Region::high;
  if (cm <= gamma) return Region::low;
  return Region::moderate;
}

/// The model's own label when Acc * p_ij exceeds alpha.
inline std::optional<int> model_assisted_label(const ModelState& state, NodeId i, NodeId j, double alpha) {
  if (state.acc * state.prob(i, j) > alpha) return predicted_label(state, i, j);
  return std::nullopt;
}

/// Unlabeled pairs eligible for selection and twin lookup, kept sorted.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::span<const NodePair> pairs) : pairs_(pairs.begin(), pairs.end()) {}

  void insert(NodePair p) { pairs_.insert(p); }
  void remove(NodePair p) { pairs_.erase(p); }
  void remove_source(NodeId i) {
    pairs_.erase(pairs_.lower_bound({i, 0}), pairs_.lower_bound({i + 1, 0}));
  }
  bool contains(NodePair p) const { return pairs_.contains(p); }
  bool empty() const noexcept { return pairs_.empty(); }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::vector<NodePair> pairs() const { return {pairs_.begin(), pairs_.end()}; }

  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

 private:
  std::set<NodePair> pairs_;
};

/// Unit-length two-hop feature rows for both graphs.
struct TwinFeatures {
  Eigen::MatrixXd source;
  Eigen::MatrixXd target;

  static TwinFeatures from(const NetworkPair& pair) {
    return {unit_rows(two_hop_features(pair.source())), unit_rows(two_hop_features(pair.target()))};
  }
};

struct TwinMatch {
  NodePair pair;
  double distance = 0.0;
};

namespace detail {

/// Cosine distance between unit (or zero) rows. A zero row is at distance 1
/// from everything.
inline double unit_distance(const Eigen::MatrixXd& x, NodeId a, NodeId b) {
  return 1.0 - x.row(a).dot(x.row(b));
}

}  // namespace detail

/// Pool pair closest to `pair` in summed two-hop cosine distance; ties go to
/// the lexicographically smaller pair. `pair` itself is skipped.
template <typename Range>
TwinMatch find_twin_pair(NodePair pair, const TwinFeatures& feat, const Range& pool) {
  std::optional<TwinMatch> best;
  for (const NodePair& q : pool) {
    if (q == pair) continue;
    const double d = detail::unit_distance(feat.source, q.source, pair.source) +
                     detail::unit_distance(feat.target, q.target, pair.target);
    if (!best || d < best->distance || (d == best->distance && q < best->pair)) best = TwinMatch{q, d};
  }
  if (!best) throw LookupError("no unlabeled pair left to serve as a twin");
  return *best;
}

struct FusionOutcome {
  LabeledPair label;
  std::optional<LabeledPair> twin_label;
  int queries = 0;
  /// The twin could not be queried; `label` holds the raw oracle answer.
  bool budget_exhausted = false;
};

/// Labels one selected pair by the three-band rule. The pair and any twin
/// are removed from `pool`. Throws BudgetExhausted if the first oracle query
/// cannot be made.
inline FusionOutcome fuse_labels(CandidatePair& c, const ModelState& state, Oracle& oracle,
                                 const SelectionConfig& cfg, CandidatePool& pool, const TwinFeatures& feat) {
  const double cm = state.acc * state.prob(c.i, c.j);
  const int y_hat = predicted_label(state, c.i, c.j);
  const Region region = fusion_region(cm, cfg.oracle_conf, cfg.gamma);
  FusionOutcome out;
  out.label.pair = c.pair();
  out.label.region = region;

  if (region == Region::high) {
    out.label.label = y_hat;
    out.label.provenance = Provenance::model;
    out.label.confidence = cm;
    pool.remove(c.pair());
    c.post_conf = out.label.confidence;
    return out;
  }

  const int used_before = oracle.queries_used();
  const int y = oracle.query(c.i, c.j);
  out.queries = oracle.queries_used() - used_before;
  pool.remove(c.pair());
  out.label.label = y;
  out.label.provenance = Provenance::oracle;

  if (region == Region::low) {
    out.label.confidence = std::min(c.cs, cfg.oracle_conf);
  } else if (y == y_hat) {
    out.label.confidence = posterior_confidence(y, y_hat, std::nullopt, cm, cfg);
  } else if (pool.empty() || oracle.remaining() == 0) {
    // No twin can be asked: fall back to the raw answer.
    out.label.confidence = cfg.oracle_conf;
    out.budget_exhausted = oracle.remaining() == 0;
  } else {
    const TwinMatch twin = find_twin_pair(c.pair(), feat, pool);
    const int y_twin = oracle.query(twin.pair.source, twin.pair.target);
    out.queries = oracle.queries_used() - used_before;
    pool.remove(twin.pair);
    out.label.label = y_twin;
    out.label.provenance = y_twin == y ? Provenance::twin_backed_oracle : Provenance::twin_backed_model;
    out.label.confidence = posterior_confidence(y, y_hat, y_twin, cm, cfg);
    out.label.twin = TwinLabel{twin.pair, y_twin};
    out.twin_label = LabeledPair{twin.pair, y_twin, Provenance::oracle, cfg.oracle_conf, std::nullopt, std::nullopt};
  }
  c.post_conf = out.label.confidence;
  return out;
}

struct BatchLabels {
  std::vector<LabeledPair> labels;  // in acquisition order, twins right after their pair
  int queries = 0;
  int model_labels = 0;
  int twin_queries = 0;
  bool budget_exhausted = false;
};

/// Fuses each batch pair in order, skipping pairs that were already labeled
/// (for instance as an earlier pair's twin). Stops when the budget runs out.
inline BatchLabels label_batch(std::vector<CandidatePair>& batch, const ModelState& state, Oracle& oracle,
                               const SelectionConfig& cfg, CandidatePool& pool, const TwinFeatures& feat) {
  BatchLabels out;
  std::set<NodePair> seen;
  for (auto& c : batch) {
    if (seen.contains(c.pair())) continue;
    FusionOutcome f;
    try {
      f = fuse_labels(c, state, oracle, cfg, pool, feat);
    } catch (const BudgetExhausted&) {
      out.budget_exhausted = true;
      break;
    }
    out.queries += f.queries;
    if (f.label.provenance == Provenance::model) ++out.model_labels;
    seen.insert(f.label.pair);
    out.labels.push_back(f.label);
    if (f.twin_label) {
      ++out.twin_queries;
      seen.insert(f.twin_label->pair);
      out.labels.push_back(*f.twin_label);
    }
    if (f.budget_exhausted) {
      out.budget_exhausted = true;
      break;
    }
  }
  return out;
}

}  // namespace rana
