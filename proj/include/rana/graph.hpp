#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rana/error.hpp"
#include "rana/random.hpp"

namespace rana {

using NodeId = Eigen::Index;

/// A (source node, target node) pair across the two networks.
struct NodePair {
  NodeId source = 0;
  NodeId target = 0;

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct NodePairHash {
  std::size_t operator()(const NodePair& p) const noexcept {
    return splitmix64(static_cast<std::uint64_t>(p.source) * 0x100000001B3ull ^
                      static_cast<std::uint64_t>(p.target));
  }
};

/// Undirected simple graph in compressed sparse adjacency form, with an
/// optional node-attribute matrix. Immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list. Self-loops are dropped, duplicates and
  /// reversed duplicates collapse to one undirected edge.
  static Graph from_edges(NodeId node_count, std::span<const std::pair<NodeId, NodeId>> edges) {
    if (node_count < 0) throw ParameterError("node count must be non-negative");
    std::vector<std::pair<NodeId, NodeId>> arcs;
    arcs.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
      if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
        throw BoundsError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                          ") outside node range " + std::to_string(node_count));
      }
      if (u == v) continue;
      arcs.emplace_back(u, v);
      arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    Graph g;
    g.node_count_ = node_count;
    g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
    g.adjacency_.reserve(arcs.size());
    for (auto [u, v] : arcs) {
      ++g.offsets_[static_cast<std::size_t>(u) + 1];
      g.adjacency_.push_back(v);
    }
    for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
    return g;
  }

  NodeId node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    check_node(v);
    const auto b = offsets_[static_cast<std::size_t>(v)];
    const auto e = offsets_[static_cast<std::size_t>(v) + 1];
    return {adjacency_.data() + b, e - b};
  }

  NodeId degree(NodeId v) const { return static_cast<NodeId>(neighbors(v).size()); }

  bool has_edge(NodeId u, NodeId v) const {
    auto n = neighbors(u);
    return std::binary_search(n.begin(), n.end(), v);
  }

  /// Each undirected edge once as (u, v) with u < v, in sorted order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count_; ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  bool has_attributes() const noexcept { return attributes_.has_value(); }

  const Eigen::MatrixXd& attributes() const {
    if (!attributes_) throw LookupError("graph has no attributes");
    return *attributes_;
  }

  Graph with_attributes(Eigen::MatrixXd attributes) const {
    if (attributes.rows() != node_count_) {
      throw DimensionError("attribute rows " + std::to_string(attributes.rows()) +
                           " != node count " + std::to_string(node_count_));
    }
    Graph g = *this;
    g.attributes_ = std::move(attributes);
    return g;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.node_count_ != b.node_count_ || a.offsets_ != b.offsets_ || a.adjacency_ != b.adjacency_) {
      return false;
    }
    if (a.attributes_.has_value() != b.attributes_.has_value()) return false;
    return !a.attributes_ || (a.attributes_->rows() == b.attributes_->rows() &&
                              a.attributes_->cols() == b.attributes_->cols() &&
                              *a.attributes_ == *b.attributes_);
  }

 private:
  void check_node(NodeId v) const {
    if (v < 0 || v >= node_count_) {
      throw BoundsError("node " + std::to_string(v) + " outside [0, " + std::to_string(node_count_) + ")");
    }
  }

  NodeId node_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::optional<Eigen::MatrixXd> attributes_;
};

/// Source and target networks with the ground-truth partial mapping and the
/// subset of it handed out as initial labels.
class NetworkPair {
 public:
  NetworkPair(Graph source, Graph target, std::vector<NodePair> groundtruth,
              std::vector<NodePair> anchors = {})
      : source_(std::move(source)), target_(std::move(target)), groundtruth_(std::move(groundtruth)) {
    std::sort(groundtruth_.begin(), groundtruth_.end());
    truth_.assign(static_cast<std::size_t>(source_.node_count()), -1);
    std::vector<char> target_used(static_cast<std::size_t>(target_.node_count()), 0);
    for (const auto& p : groundtruth_) {
      if (p.source < 0 || p.source >= source_.node_count() || p.target < 0 ||
          p.target >= target_.node_count()) {
        throw BoundsError("groundtruth pair (" + std::to_string(p.source) + ", " +
                          std::to_string(p.target) + ") outside the graphs");
      }
      auto& slot = truth_[static_cast<std::size_t>(p.source)];
      if (slot != -1) throw ConsistencyError("source node " + std::to_string(p.source) + " mapped twice");
      if (target_used[static_cast<std::size_t>(p.target)]) {
        throw ConsistencyError("groundtruth is not injective at target " + std::to_string(p.target));
      }
      slot = p.target;
      target_used[static_cast<std::size_t>(p.target)] = 1;
    }
    set_anchors(std::move(anchors));
  }

  const Graph& source() const noexcept { return source_; }
  const Graph& target() const noexcept { return target_; }
  const std::vector<NodePair>& groundtruth() const noexcept { return groundtruth_; }
  const std::vector<NodePair>& anchors() const noexcept { return anchors_; }

  /// Ground-truth target of source node `i`, if it has one.
  std::optional<NodeId> true_target(NodeId i) const {
    if (i < 0 || i >= source_.node_count()) throw BoundsError("source node out of range");
    const NodeId t = truth_[static_cast<std::size_t>(i)];
    return t < 0 ? std::nullopt : std::optional<NodeId>(t);
  }

  bool is_anchor_link(NodeId i, NodeId j) const {
    auto t = true_target(i);
    return t && *t == j;
  }

  void set_anchors(std::vector<NodePair> anchors) {
    std::sort(anchors.begin(), anchors.end());
    for (const auto& a : anchors) {
      if (!std::binary_search(groundtruth_.begin(), groundtruth_.end(), a)) {
        throw ConsistencyError("anchor (" + std::to_string(a.source) + ", " + std::to_string(a.target) +
                               ") is not in the groundtruth");
      }
    }
    anchors_ = std::move(anchors);
  }

  NetworkPair with_target(Graph target) const {
    return NetworkPair(source_, std::move(target), groundtruth_, anchors_);
  }

 private:
  Graph source_;
  Graph target_;
  std::vector<NodePair> groundtruth_;
  std::vector<NodePair> anchors_;
  std::vector<NodeId> truth_;
};

struct NoiseSpec {
  double edge_noise_ratio = 0.0;
  std::uint64_t seed = 0;

  NoiseSpec() = default;
  NoiseSpec(double ratio, std::uint64_t seed_) : edge_noise_ratio(ratio), seed(seed_) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
      throw ParameterError("edge noise ratio must lie in [0, 1], got " + std::to_string(ratio));
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<NodeId> parse_id(std::string_view tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) return std::nullopt;
  return static_cast<NodeId>(v);
}

inline std::optional<double> parse_real(std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return in;
}

/// Reads whitespace-separated integer pairs, skipping blank lines.
inline std::vector<std::pair<NodeId, NodeId>> read_id_pairs(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<NodeId, NodeId>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw ParseError(path + ": expected two node ids", lineno);
    auto a = parse_id(toks[0]);
    auto b = parse_id(toks[1]);
    if (!a || !b) throw ParseError(path + ": malformed node id", lineno);
    out.emplace_back(*a, *b);
  }
  return out;
}

inline NodeId floor_count(double ratio, std::size_t edges) {
  const double x = ratio * static_cast<double>(edges);
  // Decimal ratios such as 0.29 land just below the integer they denote.
  return static_cast<NodeId>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

}  // namespace detail

inline Graph load_edge_list(const std::string& path, std::optional<NodeId> node_count_hint = std::nullopt) {
  auto pairs = detail::read_id_pairs(path);
  NodeId max_id = -1;
  for (auto [u, v] : pairs) max_id = std::max({max_id, u, v});
  if (node_count_hint && max_id >= *node_count_hint) {
    throw BoundsError(path + ": node id " + std::to_string(max_id) + " exceeds node count " +
                      std::to_string(*node_count_hint));
  }
  return Graph::from_edges(node_count_hint.value_or(max_id + 1), pairs);
}

/// Headerless CSV of reals, one row per node.
inline Graph load_attributes(const std::string& path, const Graph& graph) {
  auto in = detail::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      auto cell = detail::parse_real(rest.substr(0, comma));
      if (!cell) throw ParseError(path + ": non-numeric cell", lineno);
      row.push_back(*cell);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ": ragged row", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<NodeId>(rows.size()) != graph.node_count()) {
    throw DimensionError(path + ": " + std::to_string(rows.size()) + " attribute rows for " +
                         std::to_string(graph.node_count()) + " nodes");
  }
  const auto cols = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) x(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return graph.with_attributes(std::move(x));
}

/// Groundtruth / anchor file: "src tgt" per line.
inline std::vector<NodePair> load_pairs(const std::string& path) {
  std::vector<NodePair> out;
  for (auto [a, b] : detail::read_id_pairs(path)) out.push_back({a, b});
  return out;
}

/// Adds floor(ratio * |E|) uniformly random new edges. Existing edges are kept.
inline Graph inject_structural_noise(const Graph& graph, const NoiseSpec& spec) {
  const NodeId n = graph.node_count();
  const std::size_t existing = graph.edge_count();
  const NodeId wanted = detail::floor_count(spec.edge_noise_ratio, existing);
  if (wanted == 0) return graph;

  const auto slots = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n > 0 ? n - 1 : 0) / 2;
  const std::uint64_t free_slots = slots - existing;
  if (static_cast<std::uint64_t>(wanted) > free_slots) {
    throw CapacityError("cannot add " + std::to_string(wanted) + " edges; only " +
                        std::to_string(free_slots) + " free slots");
  }

  Rng rng(spec.seed);
  auto edges = graph.edges();
  if (static_cast<std::uint64_t>(wanted) * 2 <= free_slots) {
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(existing + static_cast<std::size_t>(wanted));
    auto key = [n](NodeId u, NodeId v) {
      return static_cast<std::uint64_t>(std::min(u, v)) * static_cast<std::uint64_t>(n) +
             static_cast<std::uint64_t>(std::max(u, v));
    };
    for (auto [u, v] : edges) taken.insert(key(u, v));
    NodeId added = 0;
    while (added < wanted) {
      const auto u = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
      const auto v = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
      if (u == v || !taken.insert(key(u, v)).second) continue;
      edges.emplace_back(std::min(u, v), std::max(u, v));
      ++added;
    }
  } else {
    // Dense regime: enumerate the free slots and draw without replacement.
    std::vector<std::pair<NodeId, NodeId>> free;
    free.reserve(static_cast<std::size_t>(free_slots));
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!graph.has_edge(u, v)) free.emplace_back(u, v);
      }
    }
    for (auto idx : rng.sample(free.size(), static_cast<std::uint64_t>(wanted))) edges.push_back(free[idx]);
  }
  Graph noisy = Graph::from_edges(n, edges);
  return graph.has_attributes() ? noisy.with_attributes(graph.attributes()) : noisy;
}

struct SynthesisOptions {
  Eigen::Index attr_dim = 16;
  /// Weight of the neighbour mean mixed into each node's Gaussian draw.
  double smoothing = 1.0;
};

/// Random source graph, node-permuted target copy with structural noise, and
/// the permutation as groundtruth. Attributes are Gaussian draws mixed with
/// their neighbourhood mean so that adjacent nodes look alike, copied through
/// the permutation.
inline NetworkPair synthesize_pair(NodeId n, double edge_density, std::uint64_t permute_seed,
                                   const NoiseSpec& noise, const SynthesisOptions& opts = {}) {
  if (n < 2) throw ParameterError("synthetic pair needs at least 2 nodes");
  if (!(edge_density > 0.0 && edge_density < 1.0)) throw ParameterError("edge density must lie in (0, 1)");
  if (opts.attr_dim < 0) throw ParameterError("attribute dimension must be non-negative");

  Rng graph_rng(derive_seed(permute_seed, 1));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (graph_rng.uniform() < edge_density) edges.emplace_back(u, v);
    }
  }
  Graph source = Graph::from_edges(n, edges);

  Rng attr_rng(derive_seed(permute_seed, 2));
  Eigen::MatrixXd z(n, opts.attr_dim);
  for (NodeId r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < opts.attr_dim; ++c) z(r, c) = attr_rng.normal();
  }
  Eigen::MatrixXd x = z;
  for (NodeId r = 0; r < n; ++r) {
    auto nb = source.neighbors(r);
    if (nb.empty()) continue;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(opts.attr_dim);
    for (NodeId m : nb) mean += z.row(m);
    x.row(r) += opts.smoothing * mean / static_cast<double>(nb.size());
  }
  source = source.with_attributes(x);

  Rng perm_rng(derive_seed(permute_seed, 3));
  std::vector<NodeId> perm(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  perm_rng.shuffle(perm);

  std::vector<std::pair<NodeId, NodeId>> mapped;
  mapped.reserve(edges.size());
  for (auto [u, v] : edges) mapped.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
  Eigen::MatrixXd xt(n, opts.attr_dim);
  std::vector<NodePair> truth;
  truth.reserve(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    const NodeId t = perm[static_cast<std::size_t>(i)];
    xt.row(t) = x.row(i);
    truth.push_back({i, t});
  }
  Graph target = Graph::from_edges(n, mapped).with_attributes(std::move(xt));
  target = inject_structural_noise(target, noise);
  return NetworkPair(std::move(source), std::move(target), std::move(truth));
}

}  // namespace rana
