#include <superdiff/graph.hpp>
#include <superdiff_tools/synth.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace superdiff;

namespace {

SuperpixelSegmentation two_node_segmentation(Rgb left, Rgb right) {
  RgbImage img(4, 8);
  Grid<int> labels(4, 8);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 8; ++c) {
      img.at(r, c) = c < 4 ? left : right;
      labels.at(r, c) = c < 4 ? 0 : 1;
    }
  }
  return segmentation_from_labels(img, labels);
}

}  // namespace

TEST(Graph, IdenticalFeaturesGiveUnitWeight) {
  const auto seg = two_node_segmentation({50, 60, 70}, {50, 60, 70});
  const auto g = build_graph(seg, ColorSpace::Lab, 10.0);
  EXPECT_DOUBLE_EQ(g.w_matrix(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.w_matrix(0, 0), 1.0);
}

TEST(Graph, DistanceEqualToSigma2GivesInverseE) {
  const auto seg = two_node_segmentation({0, 0, 0}, {10, 0, 0});
  const auto g = build_graph(seg, ColorSpace::Rgb, 10.0);
  EXPECT_NEAR(g.w_matrix(0, 1), std::exp(-1.0), 1e-12);
  const auto sq = build_graph(seg, ColorSpace::Rgb, 100.0, DistanceForm::Squared);
  EXPECT_NEAR(sq.w_matrix(0, 1), std::exp(-1.0), 1e-12);
}

TEST(Graph, NineBlockGridEdgesMatchEnumeration) {
  const RgbImage img(9, 9, Rgb{100, 100, 100});
  const auto seg = segmentation_from_labels(img, fixtures::block_labels(9, 9, 3));
  const auto edges = close_loop_edges(seg);

  auto rc = [](int k) { return std::pair{k / 3, k % 3}; };
  auto adjacent = [&](int a, int b) {
    const auto [ra, ca] = rc(a);
    const auto [rb, cb] = rc(b);
    return std::abs(ra - rb) + std::abs(ca - cb) == 1;
  };
  std::set<std::pair<int, int>> expected;
  for (int i = 0; i < 9; ++i) {
    for (int j = i + 1; j < 9; ++j) {
      bool link = adjacent(i, j) || (i != 4 && j != 4);
      for (int m = 0; m < 9 && !link; ++m) link = adjacent(i, m) && adjacent(m, j);
      if (link) expected.insert({i, j});
    }
  }
  const std::set<std::pair<int, int>> actual(edges.begin(), edges.end());
  EXPECT_EQ(actual, expected);
  EXPECT_TRUE(expected.count({0, 8}));
  EXPECT_TRUE(expected.count({2, 6}));
}

TEST(Graph, TwoNodeLaplacian) {
  Matrix w(2, 2);
  w << 1, 1, 1, 1;
  const Laplacians l = laplacians(graph_from_affinity(w));
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_TRUE(l.l.isApprox(expected));
}

TEST(Graph, LaplacianRowSums) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto g = fixtures::random_graph(3 + t, rng);
    const Laplacians l = laplacians(g);
    const Vector ones = Vector::Ones(g.n);
    EXPECT_LT((l.l_rw * ones).norm(), 1e-12);
    EXPECT_LT((l.l_rw_tilde * ones - 0.01 * ones).norm(), 1e-12);
    EXPECT_LT((l.l_tilde - (g.degree.asDiagonal().toDenseMatrix() - kDamping * g.w_matrix)).norm(), 1e-12);
    EXPECT_LT((transition_matrix(g).rowwise().sum() - ones).norm(), 1e-12);
  }
}

TEST(Graph, AffinityValidation) {
  Matrix w(2, 2);
  w << 1, 0.5, 0.4, 1;
  EXPECT_THROW(graph_from_affinity(w), Error);
  w << 1, -0.5, -0.5, 1;
  EXPECT_THROW(graph_from_affinity(w), Error);
  const auto seg = two_node_segmentation({0, 0, 0}, {1, 1, 1});
  EXPECT_THROW(build_graph(seg, ColorSpace::Lab, 0.0), Error);
}

TEST(Graph, SynthImageGraphInvariants) {
  tools::SynthParams p;
  p.rows = 90;
  p.cols = 120;
  const auto img = tools::synth_image(p, 3);
  const auto seg = segment({"g", img.pixels, std::nullopt, {}});
  for (const ColorSpace space : kAllColorSpaces) {
    const auto g = build_graph(seg, space, 12.0);
    EXPECT_LT((g.w_matrix - g.w_matrix.transpose()).norm(), 1e-15);
    EXPECT_TRUE((g.w_matrix.diagonal().array() == 1.0).all());
    EXPECT_TRUE((g.degree.array() > 0.0).all());
    EXPECT_TRUE((g.w_matrix.array() >= 0.0).all());
    std::set<std::pair<int, int>> edge_set(g.edges.begin(), g.edges.end());
    for (int i = 0; i < g.n; ++i) {
      for (int j = i + 1; j < g.n; ++j) {
        EXPECT_EQ(g.w_matrix(i, j) > 0.0, edge_set.count({i, j}) == 1);
        if (seg.is_border[static_cast<std::size_t>(i)] && seg.is_border[static_cast<std::size_t>(j)]) {
          EXPECT_TRUE(edge_set.count({i, j}));
        }
      }
    }
  }
}

TEST(Graph, PermutationEquivariance) {
  std::mt19937_64 rng(8);
  const Matrix w = fixtures::random_affinity(12, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
  const Matrix wp = perm * w * perm.transpose();
  const auto a = laplacians(graph_from_affinity(w));
  const auto b = laplacians(graph_from_affinity(wp));
  EXPECT_LT((perm * a.l_rw_tilde * perm.transpose() - b.l_rw_tilde).norm(), 1e-12);
}
