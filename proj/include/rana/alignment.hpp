#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rana/features.hpp"
#include "rana/graph.hpp"
#include "rana/labels.hpp"

namespace rana {

enum class ModelKind { isorank, final_lite };

constexpr std::string_view to_string(ModelKind m) {
  return m == ModelKind::isorank ? "isorank" : "final_lite";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "isorank") return ModelKind::isorank;
  if (s == "final_lite" || s == "final") return ModelKind::final_lite;
  throw ParameterError("unknown model kind '" + std::string(s) + "'");
}

struct AlignerConfig {
  /// Restart weight toward the prior.
  double damping = 0.85;
  int max_iters = 100;
  double tol = 1e-6;
  ModelKind model_kind = ModelKind::isorank;

  void validate() const {
    // damping == 1 is the degenerate restart-only update, still well defined.
    if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in (0, 1]");
    if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
    if (!(tol > 0.0)) throw ParameterError("tol must be > 0");
  }
};

enum class PriorBackground { uniform, degree_similarity };

struct PriorConfig {
  PriorBackground background = PriorBackground::uniform;
  /// Total background mass before normalization; every positive carries 1.
  double background_weight = 1.0;
  /// Positives claim their whole row and column: other cells in both get no
  /// background.
  bool exclusive = false;
};

/// Labels split by polarity. Positives include the pre-aligned anchors.
struct Supervision {
  std::vector<NodePair> positives;
  std::vector<NodePair> negatives;
};

inline Supervision collect_supervision(const NetworkPair& pair, std::span<const LabeledPair> labeled) {
  Supervision sup;
  sup.positives = pair.anchors();
  for (const auto& l : labeled) (l.positive() ? sup.positives : sup.negatives).push_back(l.pair);
  std::sort(sup.positives.begin(), sup.positives.end());
  sup.positives.erase(std::unique(sup.positives.begin(), sup.positives.end()), sup.positives.end());
  std::sort(sup.negatives.begin(), sup.negatives.end());
  sup.negatives.erase(std::unique(sup.negatives.begin(), sup.negatives.end()), sup.negatives.end());
  return sup;
}

namespace detail {

inline void check_pair_in(const NodePair& p, Eigen::Index rows, Eigen::Index cols) {
  if (p.source < 0 || p.source >= rows || p.target < 0 || p.target >= cols) {
    throw BoundsError("label (" + std::to_string(p.source) + ", " + std::to_string(p.target) +
                      ") outside the alignment matrix");
  }
}

}  // namespace detail

/// Prior H: background mass plus unit mass per positive, zero on negatives,
/// normalized to sum 1.
inline Eigen::MatrixXd build_prior(const NetworkPair& pair, const Supervision& sup, const PriorConfig& cfg = {}) {
  const Eigen::Index ns = pair.source().node_count();
  const Eigen::Index nt = pair.target().node_count();
  Eigen::MatrixXd h(ns, nt);
  if (cfg.background == PriorBackground::uniform) {
    h.setOnes();
  } else {
    for (Eigen::Index i = 0; i < ns; ++i) {
      const double di = static_cast<double>(pair.source().degree(i));
      for (Eigen::Index j = 0; j < nt; ++j) {
        const double dj = static_cast<double>(pair.target().degree(j));
        const double m = std::max(di, dj);
        h(i, j) = m == 0.0 ? 1.0 : 1.0 - std::abs(di - dj) / m;
      }
    }
  }
  const double bg_sum = h.sum();
  if (bg_sum > 0.0) h *= cfg.background_weight / bg_sum;

  std::unordered_map<NodeId, NodeId> claimed;
  for (const auto& p : sup.positives) {
    detail::check_pair_in(p, ns, nt);
    auto [it, fresh] = claimed.emplace(p.source, p.target);
    if (!fresh && it->second != p.target) {
      throw ConsistencyError("conflicting positive labels for source " + std::to_string(p.source));
    }
  }
  for (const auto& p : sup.negatives) {
    detail::check_pair_in(p, ns, nt);
    auto it = claimed.find(p.source);
    if (it != claimed.end() && it->second == p.target) {
      throw ConsistencyError("pair (" + std::to_string(p.source) + ", " + std::to_string(p.target) +
                             ") labeled both positive and negative");
    }
  }
  if (cfg.exclusive) {
    for (const auto& p : sup.positives) {
      h.row(p.source).setZero();
      h.col(p.target).setZero();
    }
  }
  for (const auto& p : sup.positives) h(p.source, p.target) = 1.0;
  for (const auto& p : sup.negatives) h(p.source, p.target) = 0.0;

  const double total = h.sum();
  if (total > 0.0) h /= total;
  return h;
}

inline Eigen::MatrixXd build_prior(const NetworkPair& pair, std::span<const LabeledPair> labeled,
                                   const PriorConfig& cfg = {}) {
  return build_prior(pair, collect_supervision(pair, labeled), cfg);
}

/// Fitted aligner output.
struct ModelState {
  Eigen::MatrixXd scores;  // S, N_s x N_t, non-negative
  Eigen::MatrixXd prob;    // p_ij over each row's candidate set; 0 off-candidate
  double acc = 0.5;        // smoothed accuracy on labeled positives
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Zeroes the forbidden (negatively labeled) cells. Idempotent.
inline void apply_mask(Eigen::MatrixXd& s, std::span<const NodePair> forbidden) {
  for (const auto& p : forbidden) {
    detail::check_pair_in(p, s.rows(), s.cols());
    s(p.source, p.target) = 0.0;
  }
}

/// Column of the largest entry in row i; the smallest column wins ties.
inline NodeId row_argmax(const Eigen::MatrixXd& s, NodeId i) {
  NodeId best = 0;
  for (Eigen::Index j = 1; j < s.cols(); ++j) {
    if (s(i, j) > s(i, best)) best = j;
  }
  return best;
}

/// Per-row candidate target lists; an empty list leaves that row out.
using CandidateSets = std::vector<std::vector<NodeId>>;

inline CandidateSets all_targets(Eigen::Index rows, Eigen::Index cols) {
  std::vector<NodeId> every(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) every[static_cast<std::size_t>(j)] = j;
  return CandidateSets(static_cast<std::size_t>(rows), every);
}

/// p_ij = S_ij / sum over cand(i). All-zero rows become uniform over cand(i).
inline Eigen::MatrixXd row_probabilities(const Eigen::MatrixXd& s, const CandidateSets& candidates) {
  if (static_cast<Eigen::Index>(candidates.size()) != s.rows()) {
    throw DimensionError("candidate sets must cover every row");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const auto& cand = candidates[static_cast<std::size_t>(i)];
    if (cand.empty()) continue;
    double total = 0.0;
    for (NodeId j : cand) total += s(i, j);
    for (NodeId j : cand) {
      p(i, j) = total > 0.0 ? s(i, j) / total : 1.0 / static_cast<double>(cand.size());
    }
  }
  return p;
}

/// (hits + 1) / (|positives| + 2), a hit being a labeled source whose row
/// argmax is its labeled target.
inline double estimate_accuracy(const Eigen::MatrixXd& s, std::span<const NodePair> positives) {
  if (positives.empty()) throw EstimationError("accuracy needs at least one labeled positive");
  std::size_t hits = 0;
  for (const auto& p : positives) {
    detail::check_pair_in(p, s.rows(), s.cols());
    if (row_argmax(s, p.source) == p.target) ++hits;
  }
  return (static_cast<double>(hits) + 1.0) / (static_cast<double>(positives.size()) + 2.0);
}

inline double estimate_accuracy(const ModelState& state, std::span<const NodePair> positives) {
  return estimate_accuracy(state.scores, positives);
}

/// 1 iff j is the row argmax of S for source i.
inline int predicted_label(const ModelState& state, NodeId i, NodeId j) {
  detail::check_pair_in({i, j}, state.scores.rows(), state.scores.cols());
  return row_argmax(state.scores, i) == j ? 1 : 0;
}

/// Clamped-to-[0,1] cosine similarity between every source and target
/// attribute row.
inline Eigen::MatrixXd attribute_similarity(const Graph& source, const Graph& target) {
  if (!source.has_attributes() || !target.has_attributes()) {
    throw ParameterError("attribute-consistent alignment needs attributes on both graphs");
  }
  if (source.attributes().cols() != target.attributes().cols()) {
    throw DimensionError("source and target attribute dimensions differ");
  }
  Eigen::MatrixXd w = unit_rows(source.attributes()) * unit_rows(target.attributes()).transpose();
  return w.cwiseMax(0.0).cwiseMin(1.0);
}

namespace detail {

inline ModelState fixed_point(const NetworkPair& pair, const Eigen::MatrixXd& prior, const AlignerConfig& cfg,
                              const Eigen::MatrixXd* weights, const Supervision& sup) {
  cfg.validate();
  if (prior.rows() != pair.source().node_count() || prior.cols() != pair.target().node_count()) {
    throw DimensionError("prior shape does not match the network pair");
  }
  const Eigen::SparseMatrix<double> source_t = normalized_adjacency(pair.source()).transpose();
  const SparseRowMatrix target_walk = normalized_adjacency(pair.target());
  const double keep = 1.0 - cfg.damping;

  ModelState state;
  state.scores = prior;
  Eigen::MatrixXd next(prior.rows(), prior.cols());
  Eigen::MatrixXd half(prior.rows(), prior.cols());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    half.noalias() = source_t * state.scores;
    next.noalias() = half * target_walk;
    if (weights) next = next.cwiseProduct(*weights);
    next = keep * next + cfg.damping * prior;
    state.residual = (next - state.scores).cwiseAbs().maxCoeff();
    state.scores.swap(next);
    state.iterations = it;
    if (state.residual <= cfg.tol) {
      state.converged = true;
      break;
    }
  }
  state.scores = state.scores.cwiseMax(0.0);
  apply_mask(state.scores, sup.negatives);
  state.prob = row_probabilities(state.scores, all_targets(state.scores.rows(), state.scores.cols()));
  if (!sup.positives.empty()) state.acc = estimate_accuracy(state.scores, sup.positives);
  return state;
}

}  // namespace detail

/// S <- (1 - damping) * A_s^T S A_t + damping * H until the max-abs step is
/// within tol. Non-convergence is reported on the state, not thrown.
inline ModelState isorank_align(const NetworkPair& pair, const Eigen::MatrixXd& prior, const AlignerConfig& cfg,
                                const Supervision& sup = {}) {
  return detail::fixed_point(pair, prior, cfg, nullptr, sup);
}

/// IsoRank propagation gated elementwise by attribute similarity W.
inline ModelState final_lite_align(const NetworkPair& pair, const Eigen::MatrixXd& prior, const AlignerConfig& cfg,
                                   const Supervision& sup = {}) {
  const Eigen::MatrixXd w = attribute_similarity(pair.source(), pair.target());
  return detail::fixed_point(pair, prior, cfg, &w, sup);
}

/// Variant taking a precomputed similarity matrix, for callers that refit
/// many times on the same pair.
inline ModelState final_lite_align(const NetworkPair& pair, const Eigen::MatrixXd& prior, const AlignerConfig& cfg,
                                   const Eigen::MatrixXd& similarity, const Supervision& sup) {
  if (similarity.rows() != prior.rows() || similarity.cols() != prior.cols()) {
    throw DimensionError("similarity shape does not match the prior");
  }
  return detail::fixed_point(pair, prior, cfg, &similarity, sup);
}

inline ModelState align(const NetworkPair& pair, const Eigen::MatrixXd& prior, const AlignerConfig& cfg,
                        const Supervision& sup = {}) {
  return cfg.model_kind == ModelKind::isorank ? isorank_align(pair, prior, cfg, sup)
                                              : final_lite_align(pair, prior, cfg, sup);
}

}  // namespace rana
