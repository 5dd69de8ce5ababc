#include "superdiff/features.hpp"

namespace superdiff {

LowRankDiffusion FeatureDiffusion::feature_operator() const {
  LowRankDiffusion op;
  op.basis = u_matrix.rightCols(u_matrix.cols() - 1);
  op.eigenvalues = lambda.tail(lambda.size() - 1);
  op.projection_weights = Vector::Ones(u_matrix.rows());
  return op;
}

FeatureDiffusion make_feature_diffusion(const FeatureBank& bank) {
  const Matrix& g = bank.node_features;
  if (g.cols() == 0) throw Error(ErrorCode::FeatureMissing, "feature bank has no columns");
  if (!g.allFinite() || (g.array() < 0.0).any() || (g.array() > 1.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "feature columns must be finite and in [0,1]");
  }
  FeatureDiffusion fd;
  fd.u_matrix.resize(g.rows(), g.cols() + 1);
  fd.u_matrix.col(0).setOnes();
  fd.u_matrix.rightCols(g.cols()) = g;
  fd.lambda = Vector::Ones(g.cols() + 1);
  return fd;
}

NormalizedOutput feature_diffusion_apply(const FeatureDiffusion& fd, const Vector& seed) {
  return normalize_for_seed(fd.feature_operator(), seed);
}

}  // namespace superdiff
