#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

#include "rana/error.hpp"
#include "rana/graph.hpp"
#include "rana/random.hpp"

namespace rana {

/// Simulated annotator answering "is (i, j) an anchor link?" correctly with
/// probability alpha. Answers are a pure function of (seed, i, j), so a pair
/// asked twice gets the same answer and is charged once.
class Oracle {
 public:
  Oracle(const NetworkPair& pair, double alpha, std::uint64_t seed, std::optional<int> budget = std::nullopt)
      : pair_(&pair), alpha_(alpha), seed_(seed), budget_(budget) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("oracle accuracy must lie in (0, 1]");
    if (budget && *budget < 0) throw ParameterError("oracle budget must be >= 0");
  }

  double alpha() const noexcept { return alpha_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int queries_used() const noexcept { return used_; }
  std::optional<int> budget() const noexcept { return budget_; }

  /// Queries left, or nullopt without a budget.
  std::optional<int> remaining() const noexcept {
    if (!budget_) return std::nullopt;
    return *budget_ - used_;
  }

  bool answered(NodePair p) const { return cache_.contains(p); }

  /// Answer without charging or recording; the value `query` would return.
  int peek(NodeId i, NodeId j) const {
    check(i, j);
    const int truth = pair_->is_anchor_link(i, j) ? 1 : 0;
    return keyed_uniform(seed_, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)) < alpha_ ? truth
                                                                                                     : 1 - truth;
  }

  int query(NodeId i, NodeId j) {
    check(i, j);
    const NodePair p{i, j};
    if (auto it = cache_.find(p); it != cache_.end()) return it->second;
    if (budget_ && used_ >= *budget_) throw BudgetExhausted("oracle budget of " + std::to_string(*budget_) + " used up");
    const int y = peek(i, j);
    cache_.emplace(p, y);
    ++used_;
    return y;
  }

 private:
  void check(NodeId i, NodeId j) const {
    if (i < 0 || i >= pair_->source().node_count() || j < 0 || j >= pair_->target().node_count()) {
      throw BoundsError("oracle query (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    }
  }

  const NetworkPair* pair_;
  double alpha_;
  std::uint64_t seed_;
  std::optional<int> budget_;
  int used_ = 0;
  std::unordered_map<NodePair, int, NodePairHash> cache_;
};

}  // namespace rana
