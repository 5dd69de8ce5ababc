#include <superdiff/spectral.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace superdiff;

TEST(Spectral, TwoNodeEigenvalues) {
  Matrix w(2, 2);
  w << 1, 1, 1, 1;
  const auto dec = decompose_rw_tilde(graph_from_affinity(w));
  EXPECT_NEAR(dec.eigenvalues(0), 0.01, 1e-12);
  EXPECT_NEAR(dec.eigenvalues(1), 1.0, 1e-12);
}

TEST(Spectral, SmallestEigenpairIsConstant) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto g = fixtures::random_graph(4 + t, rng);
    for (const EigvecNorm norm : {EigvecNorm::Euclidean, EigvecNorm::DOrthonormal}) {
      const auto dec = decompose_rw_tilde(g, norm);
      EXPECT_NEAR(dec.eigenvalues(0), 0.01, 1e-6);
      EXPECT_EQ(dec.constant_index, 0);
      const Vector u = dec.eigenvectors.col(0);
      EXPECT_LT((u.array() - u.mean()).abs().maxCoeff(), 1e-8);
      EXPECT_GT(u.mean(), 0.0);
    }
  }
}

TEST(Spectral, DisconnectedGraphHasTwoMinimalEigenvalues) {
  std::mt19937_64 rng(2);
  Matrix w = Matrix::Zero(10, 10);
  w.topLeftCorner(5, 5) = fixtures::random_affinity(5, rng);
  w.bottomRightCorner(5, 5) = fixtures::random_affinity(5, rng);
  const auto dec = decompose_rw_tilde(graph_from_affinity(w));
  EXPECT_NEAR(dec.eigenvalues(0), 0.01, 1e-10);
  EXPECT_NEAR(dec.eigenvalues(1), 0.01, 1e-10);
  EXPECT_GT(dec.eigenvalues(2), 0.01 + 1e-6);
  // The degenerate pair is orthonormal.
  const Matrix u = dec.eigenvectors.leftCols(2);
  EXPECT_LT((u.transpose() * u - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(Spectral, EigenpairResiduals) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto g = fixtures::random_graph(25, rng);
    const Matrix a = laplacians(g).l_rw_tilde;
    for (const EigvecNorm norm : {EigvecNorm::Euclidean, EigvecNorm::DOrthonormal}) {
      const auto dec = decompose_rw_tilde(g, norm);
      for (int l = 0; l < dec.size(); ++l) {
        const Vector u = dec.eigenvectors.col(l);
        EXPECT_LE((a * u - dec.eigenvalues(l) * u).norm(), 1e-6 * std::max(1.0, u.norm()));
      }
      for (int l = 1; l < dec.size(); ++l) EXPECT_LE(dec.eigenvalues(l - 1), dec.eigenvalues(l));
    }
  }
}

TEST(Spectral, SignConvention) {
  std::mt19937_64 rng(4);
  const auto dec = decompose_rw_tilde(fixtures::random_graph(15, rng));
  for (int l = 0; l < dec.size(); ++l) {
    Eigen::Index idx;
    dec.eigenvectors.col(l).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(dec.eigenvectors(idx, l), 0.0);
  }
}

TEST(Spectral, EigenvalueShiftProperty) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto g = fixtures::random_graph(12, rng);
    const auto plain = decompose(laplacians(g).l_rw, g.degree);
    const auto tilde = decompose_rw_tilde(g);
    EXPECT_LT((tilde.eigenvalues - (0.99 * plain.eigenvalues.array() + 0.01).matrix()).norm(), 1e-8);
    EXPECT_LT((tilde.eigenvectors - plain.eigenvectors).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Spectral, DiffusionApplyBasics) {
  std::mt19937_64 rng(6);
  const auto g = fixtures::random_graph(10, rng);
  const auto dec = decompose_l_tilde(g);
  EXPECT_EQ(diffusion_apply(dec, Vector::Zero(10)), Vector::Zero(10));

  Matrix one(1, 1);
  one << 1.0;
  const auto single = decompose_l_tilde(graph_from_affinity(one));
  EXPECT_NEAR(single.eigenvalues(0), 0.01, 1e-15);
  EXPECT_NEAR(diffusion_apply(single, Vector::Ones(1))(0), 100.0, 1e-9);
}

TEST(Spectral, SymmetricOperatorMatchesDirectInverse) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto g = fixtures::random_graph(5 + t, rng);
    const Vector s = fixtures::random_seed(g.n, rng);
    const Vector direct = laplacians(g).l_tilde.lu().solve(s);
    EXPECT_LT((diffusion_apply(decompose_l_tilde(g), s) - direct).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Spectral, RandomWalkForms) {
  std::mt19937_64 rng(8);
  const auto g = fixtures::random_graph(14, rng);
  const Vector s = fixtures::random_seed(g.n, rng);
  const auto eu = decompose_rw_tilde(g, EigvecNorm::Euclidean);
  const Vector resynth = eu.eigenvectors * eu.eigenvalues.cwiseInverse().asDiagonal() * eu.eigenvectors.transpose() * s;
  EXPECT_LT((diffusion_apply(eu, s) - resynth).norm(), 1e-10);
  EXPECT_LT((diffusion_matrix(eu) * s - resynth).norm(), 1e-10);

  const auto dn = decompose_rw_tilde(g, EigvecNorm::DOrthonormal);
  const Vector exact = laplacians(g).l_rw_tilde.lu().solve(s);
  EXPECT_LT((diffusion_apply(dn, s) - exact).norm(), 1e-8);
  const Matrix utdu = dn.eigenvectors.transpose() * g.degree.asDiagonal() * dn.eigenvectors;
  EXPECT_LT((utdu - Matrix::Identity(g.n, g.n)).norm(), 1e-8);
}

TEST(Spectral, DiffusionMapInnerProducts) {
  std::mt19937_64 rng(9);
  const auto dec = decompose_l_tilde(fixtures::random_graph(9, rng));
  const Matrix psi = diffusion_map(dec);
  EXPECT_LT((psi * psi.transpose() - diffusion_matrix(dec)).norm(), 1e-8);
}

TEST(Spectral, NeumannSeries) {
  std::mt19937_64 rng(10);
  const auto g = fixtures::random_graph(10, rng);
  const Vector x = fixtures::random_seed(10, rng);
  EXPECT_EQ(neumann_check(g, x, 1), x);
  EXPECT_EQ(neumann_check(g, Vector::Zero(10), 50), Vector::Zero(10));
  const Matrix p = transition_matrix(g);
  const Vector direct = (Matrix::Identity(10, 10) - 0.99 * p).lu().solve(x);
  EXPECT_LT((neumann_check(g, x, 5000) - direct).cwiseAbs().maxCoeff(), 1e-6);
  const Vector via_laplacian = laplacians(g).l_rw_tilde.lu().solve(x);
  EXPECT_LT((direct - via_laplacian).norm(), 1e-8);
}

TEST(Spectral, PermutationEquivariance) {
  std::mt19937_64 rng(11);
  const Matrix w = fixtures::random_affinity(11, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(11);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 11, rng);
  const Vector s = fixtures::random_seed(11, rng);
  const Vector a = diffusion_apply(decompose_rw_tilde(graph_from_affinity(w)), s);
  const Vector b = diffusion_apply(decompose_rw_tilde(graph_from_affinity(perm * w * perm.transpose())), perm * s);
  EXPECT_LT((perm * a - b).norm(), 1e-8);
}

TEST(Spectral, Errors) {
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  EXPECT_THROW(decompose(asym, Vector::Ones(2)), Error);
  try {
    decompose(asym, Vector::Ones(2));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericalFailure);
  }
  Matrix w(2, 2);
  w << 1, 1, 1, 1;
  const auto g = graph_from_affinity(w);
  const auto plain = decompose(laplacians(g).l_rw, g.degree);
  try {
    diffusion_apply(plain, Vector::Ones(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularEigenvalue);
  }
}
