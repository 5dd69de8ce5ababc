#pragma once

#include "superdiff/superpixel.hpp"
#include "superdiff/types.hpp"

#include <utility>
#include <vector>

namespace superdiff {

/// Damping applied to W in the regularized Laplacians.
inline constexpr double kDamping = 0.99;

enum class DistanceForm {
  Euclidean,  // exp(-||vi - vj|| / sigma2)
  Squared,    // exp(-||vi - vj||^2 / sigma2)
};

struct SaliencyGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
  Matrix w_matrix;                         // symmetric, w_ii = 1
  Vector degree;
  ColorSpace space = ColorSpace::Lab;
  double sigma2 = 10.0;
};

/// Close-loop 2-hop graph: spatial 1-hop and 2-hop neighbours plus every pair of border
/// nodes, weighted by exp(-dist / sigma2) on the mean feature of `space`.
SaliencyGraph build_graph(const SuperpixelSegmentation& seg, ColorSpace space, double sigma2,
                          DistanceForm form = DistanceForm::Euclidean);

/// Edge set of the close-loop 2-hop graph, independent of the weights.
std::vector<std::pair<int, int>> close_loop_edges(const SuperpixelSegmentation& seg);

/// Wraps an arbitrary symmetric nonnegative affinity matrix. Edges are its nonzero
/// off-diagonal entries.
SaliencyGraph graph_from_affinity(Matrix w_matrix);

struct Laplacians {
  Matrix l;            // D - W
  Matrix l_rw;         // D^-1 (D - W)
  Matrix l_tilde;      // D - 0.99 W
  Matrix l_rw_tilde;   // D^-1 (D - 0.99 W)
};

Laplacians laplacians(const SaliencyGraph& g);

/// P = D^-1 W.
Matrix transition_matrix(const SaliencyGraph& g);

}  // namespace superdiff
