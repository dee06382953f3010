#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rana/graph.hpp"

namespace rana {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row-stochastic random-walk matrix D^-1 A. Rows of isolated nodes are empty.
inline SparseRowMatrix normalized_adjacency(const Graph& graph) {
  const NodeId n = graph.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * 2);
  for (NodeId u = 0; u < n; ++u) {
    auto nb = graph.neighbors(u);
    const double w = nb.empty() ? 0.0 : 1.0 / static_cast<double>(nb.size());
    for (NodeId v : nb) triplets.emplace_back(u, v, w);
  }
  SparseRowMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

/// Row i is the k-step random-walk landing distribution from node i. With
/// `keep_top > 0` only the largest `keep_top` entries of each row survive
/// (ties keep the lower column).
inline Eigen::MatrixXd structural_features(const Graph& graph, int k, Eigen::Index keep_top = 0) {
  if (k < 1) throw ParameterError("structural feature depth must be >= 1");
  const auto a = normalized_adjacency(graph);
  Eigen::MatrixXd walk = Eigen::MatrixXd(a);
  for (int step = 1; step < k; ++step) walk = Eigen::MatrixXd(walk * a);

  if (keep_top > 0 && keep_top < walk.cols()) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(walk.cols()));
    for (Eigen::Index r = 0; r < walk.rows(); ++r) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index x, Eigen::Index y) { return walk(r, x) > walk(r, y); });
      for (std::size_t c = static_cast<std::size_t>(keep_top); c < order.size(); ++c) walk(r, order[c]) = 0.0;
    }
  }
  return walk;
}

/// Node features: the real attributes if present, else the 2-step walk surrogate.
inline Eigen::MatrixXd feature_matrix(const Graph& graph) {
  if (graph.has_attributes()) return graph.attributes();
  return structural_features(graph, 2);
}

/// Two rounds of mean aggregation over neighbours, A_hat^2 X.
inline Eigen::MatrixXd two_hop_features(const Graph& graph) {
  const auto a = normalized_adjacency(graph);
  const Eigen::MatrixXd x = feature_matrix(graph);
  Eigen::MatrixXd once = a * x;
  return a * once;
}

/// Cosine similarity; 0 when either vector is zero.
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return x.dot(y) / (nx * ny);
}

/// Copy of `x` with every row scaled to unit length (zero rows stay zero).
inline Eigen::MatrixXd unit_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double nrm = out.row(r).norm();
    if (nrm > 0.0) out.row(r) /= nrm;
  }
  return out;
}

}  // namespace rana
