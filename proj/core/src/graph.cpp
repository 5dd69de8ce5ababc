#include "superdiff/graph.hpp"

#include <algorithm>
#include <cmath>

namespace superdiff {

std::vector<std::pair<int, int>> close_loop_edges(const SuperpixelSegmentation& seg) {
  const int n = seg.n_nodes;
  const auto one_hop = node_neighbors(seg);
  std::vector<std::vector<char>> linked(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  auto link = [&](int i, int j) {
    if (i == j) return;
    linked[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
    linked[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
  };
  for (int i = 0; i < n; ++i) {
    for (const int j : one_hop[static_cast<std::size_t>(i)]) {
      link(i, j);
      for (const int k : one_hop[static_cast<std::size_t>(j)]) link(i, k);
    }
  }
  std::vector<int> border;
  for (int i = 0; i < n; ++i)
    if (seg.is_border[static_cast<std::size_t>(i)]) border.push_back(i);
  for (std::size_t a = 0; a < border.size(); ++a)
    for (std::size_t b = a + 1; b < border.size(); ++b) link(border[a], border[b]);

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (linked[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) edges.emplace_back(i, j);
  return edges;
}

SaliencyGraph build_graph(const SuperpixelSegmentation& seg, ColorSpace space, double sigma2,
                          DistanceForm form) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma2 must be positive");
  SaliencyGraph g;
  g.n = seg.n_nodes;
  g.space = space;
  g.sigma2 = sigma2;
  g.edges = close_loop_edges(seg);
  const Matrix& v = seg.features(space);
  g.w_matrix = Matrix::Identity(g.n, g.n);
  for (const auto& [i, j] : g.edges) {
    const double d = (v.row(i) - v.row(j)).norm();
    const double w = std::exp(-(form == DistanceForm::Squared ? d * d : d) / sigma2);
    g.w_matrix(i, j) = w;
    g.w_matrix(j, i) = w;
  }
  g.degree = g.w_matrix.rowwise().sum();
  return g;
}

SaliencyGraph graph_from_affinity(Matrix w_matrix) {
  if (w_matrix.rows() != w_matrix.cols()) throw Error(ErrorCode::ShapeMismatch, "affinity must be square");
  if (!w_matrix.isApprox(w_matrix.transpose(), 1e-12) || (w_matrix.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "affinity must be symmetric and nonnegative");
  }
  SaliencyGraph g;
  g.n = static_cast<int>(w_matrix.rows());
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (w_matrix(i, j) > 0.0) g.edges.emplace_back(i, j);
  g.degree = w_matrix.rowwise().sum();
  if ((g.degree.array() <= 0.0).any()) throw Error(ErrorCode::InvalidArgument, "every node needs positive degree");
  g.w_matrix = std::move(w_matrix);
  g.sigma2 = 0.0;
  return g;
}

Laplacians laplacians(const SaliencyGraph& g) {
  const Matrix d = g.degree.asDiagonal();
  const Vector inv_d = g.degree.cwiseInverse();
  Laplacians out;
  out.l = d - g.w_matrix;
  out.l_tilde = d - kDamping * g.w_matrix;
  out.l_rw = inv_d.asDiagonal() * out.l;
  out.l_rw_tilde = inv_d.asDiagonal() * out.l_tilde;
  return out;
}

Matrix transition_matrix(const SaliencyGraph& g) {
  return g.degree.cwiseInverse().asDiagonal() * g.w_matrix;
}

}  // namespace superdiff
