#include <superdiff/features.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace superdiff;

namespace {

FeatureBank bank(const Matrix& g) { return {g, std::vector<std::string>(static_cast<std::size_t>(g.cols()), "f")}; }

}  // namespace

TEST(Features, SingleIndicatorColumnIsReproduced) {
  Vector gt(6);
  gt << 0, 1, 1, 0, 0, 1;
  const auto fd = make_feature_diffusion(bank(gt));
  EXPECT_EQ(fd.u_matrix.col(0), Vector::Ones(6));
  EXPECT_EQ(fd.lambda, Vector::Ones(2));
  const Vector y = feature_diffusion_apply(fd, Vector::Constant(6, 0.3)).y_hat;
  EXPECT_LT((y - gt).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Features, ZeroSeedIsEmpty) {
  const auto fd = make_feature_diffusion(bank(Matrix::Constant(4, 1, 0.2)));
  try {
    feature_diffusion_apply(fd, Vector::Zero(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySeed);
  }
}

TEST(Features, TwoRandomColumnsMatchDirectEvaluation) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Matrix g(12, 2);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = u(rng);
    const Vector s = fixtures::random_seed(12, rng);
    const Vector raw = g.col(0) * g.col(0).dot(s) + g.col(1) * g.col(1).dot(s);
    const Vector oracle = (raw.array() - raw.minCoeff()) / (raw.maxCoeff() - raw.minCoeff());
    const Vector y = feature_diffusion_apply(make_feature_diffusion(bank(g)), s).y_hat;
    EXPECT_LT((y - oracle).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(y.minCoeff(), 0.0, 1e-12);
    EXPECT_NEAR(y.maxCoeff(), 1.0, 1e-12);
  }
}

TEST(Features, IdenticalRowsGetIdenticalValues) {
  Matrix g(5, 3);
  g << 0.1, 0.5, 0.9, 0.3, 0.2, 0.1, 0.1, 0.5, 0.9, 0.7, 0.7, 0.0, 1.0, 0.0, 0.4;
  std::mt19937_64 rng(2);
  const Vector y = feature_diffusion_apply(make_feature_diffusion(bank(g)), fixtures::random_seed(5, rng)).y_hat;
  EXPECT_DOUBLE_EQ(y(0), y(2));
}

TEST(Features, Validation) {
  try {
    make_feature_diffusion(bank(Matrix(4, 0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FeatureMissing);
  }
  EXPECT_THROW(make_feature_diffusion(bank(Matrix::Constant(3, 1, 1.5))), Error);
}
