#pragma once

#include "superdiff/ingest.hpp"
#include "superdiff/refine.hpp"
#include "superdiff/types.hpp"

namespace superdiff {

/// External saliency features used as a pseudo-diffusion block: U = [1, g^1, ..., g^Z]
/// with a unit spectrum.
struct FeatureDiffusion {
  Matrix u_matrix;  // N x (Z+1)
  Vector lambda;    // Z+1 ones

  int n() const { return static_cast<int>(u_matrix.rows()); }
  int n_features() const { return static_cast<int>(u_matrix.cols()) - 1; }
  /// The non-constant part as a low-rank operator (basis G, unit eigenvalues).
  LowRankDiffusion feature_operator() const;
};

FeatureDiffusion make_feature_diffusion(const FeatureBank& bank);

/// y_bar = G G^T s over the feature columns, normalized to [0,1] with the constant column
/// carrying the offset. Throws EmptySeed.
NormalizedOutput feature_diffusion_apply(const FeatureDiffusion& fd, const Vector& seed);

}  // namespace superdiff
