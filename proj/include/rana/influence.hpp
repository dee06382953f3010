#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rana/graph.hpp"

namespace rana {

struct InfluenceEntry {
  NodeId node;
  double value;
};

/// Normalized k-step influence I(m, i, k) of every node i on every node m,
/// stored as one sparse row per influencing node i (sorted by m).
class InfluenceField {
 public:
  InfluenceField(int k, double trunc_eps, std::vector<std::vector<InfluenceEntry>> rows)
      : k_(k), trunc_eps_(trunc_eps), rows_(std::move(rows)) {}

  int depth() const noexcept { return k_; }
  double trunc_eps() const noexcept { return trunc_eps_; }
  NodeId node_count() const noexcept { return static_cast<NodeId>(rows_.size()); }

  std::span<const InfluenceEntry> row(NodeId i) const {
    if (i < 0 || i >= node_count()) throw BoundsError("influence source " + std::to_string(i) + " out of range");
    return rows_[static_cast<std::size_t>(i)];
  }

 private:
  int k_;
  double trunc_eps_;
  std::vector<std::vector<InfluenceEntry>> rows_;
};

/// Raw influence of i on m is the k-step walk probability (A_hat^k)_{i,m};
/// each target's column is then normalized over all influencing nodes and
/// entries <= trunc_eps are dropped.
inline InfluenceField compute_influence(const Graph& graph, int k, double trunc_eps) {
  if (k < 0) throw ParameterError("influence depth must be >= 0");
  if (!(trunc_eps >= 0.0)) throw ParameterError("truncation threshold must be >= 0");
  const NodeId n = graph.node_count();
  const auto un = static_cast<std::size_t>(n);

  std::vector<std::vector<InfluenceEntry>> raw(un);
  std::vector<double> column_mass(un, 0.0);
  std::vector<double> cur(un, 0.0);
  std::vector<double> nxt(un, 0.0);
  std::vector<NodeId> frontier;
  std::vector<NodeId> touched;
  std::vector<char> seen(un, 0);

  for (NodeId i = 0; i < n; ++i) {
    frontier.assign(1, i);
    cur[static_cast<std::size_t>(i)] = 1.0;
    for (int step = 0; step < k; ++step) {
      touched.clear();
      for (NodeId u : frontier) {
        const double mass = cur[static_cast<std::size_t>(u)];
        cur[static_cast<std::size_t>(u)] = 0.0;
        auto nb = graph.neighbors(u);
        if (nb.empty() || mass == 0.0) continue;
        const double share = mass / static_cast<double>(nb.size());
        for (NodeId v : nb) {
          const auto uv = static_cast<std::size_t>(v);
          if (!seen[uv]) {
            seen[uv] = 1;
            touched.push_back(v);
          }
          nxt[uv] += share;
        }
      }
      for (NodeId v : touched) seen[static_cast<std::size_t>(v)] = 0;
      std::swap(cur, nxt);
      frontier.swap(touched);
    }
    std::sort(frontier.begin(), frontier.end());
    auto& row = raw[static_cast<std::size_t>(i)];
    for (NodeId m : frontier) {
      const double v = cur[static_cast<std::size_t>(m)];
      cur[static_cast<std::size_t>(m)] = 0.0;
      if (v > 0.0) {
        row.push_back({m, v});
        column_mass[static_cast<std::size_t>(m)] += v;
      }
    }
  }

  for (auto& row : raw) {
    std::vector<InfluenceEntry> kept;
    kept.reserve(row.size());
    for (const auto& e : row) {
      const double v = e.value / column_mass[static_cast<std::size_t>(e.node)];
      if (v > trunc_eps) kept.push_back({e.node, v});
    }
    row = std::move(kept);
  }
  return InfluenceField(k, trunc_eps, std::move(raw));
}

inline std::span<const InfluenceEntry> influence_row(const InfluenceField& field, NodeId i) {
  return field.row(i);
}

}  // namespace rana
