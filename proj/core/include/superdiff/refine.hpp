#pragma once

#include "superdiff/spectral.hpp"
#include "superdiff/types.hpp"

#include <vector>

namespace superdiff {

/// How eigenvector discriminability is measured before thresholding.
enum class VarianceMode {
  /// N * var(u) for unit-norm u, in (0, 1].
  Unit,
  /// var(u) after min-max scaling u to [0, 255]; pair with a threshold of 300.
  Scaled255,
};

struct RefineParams {
  bool drop_constant = true;
  bool eigengap = true;
  bool variance_filter = true;
  double var_threshold = 0.05;
  int l_max = 30;
  VarianceMode variance_mode = VarianceMode::Unit;
};

/// A diffusion operator re-synthesized from a subset of eigenpairs:
/// y = basis diag(1/eigenvalues) basis^T (projection_weights .* s).
struct LowRankDiffusion {
  Matrix basis;
  Vector eigenvalues;
  Vector projection_weights;

  int n() const { return static_cast<int>(basis.rows()); }
  int rank() const { return static_cast<int>(basis.cols()); }
  Vector apply(const Vector& seed) const;
  Matrix matrix() const;
};

struct RefinedDiffusion {
  std::vector<int> kept_indices;  // 0-based eigen indices, ascending
  LowRankDiffusion op;            // u_bar, lambda_bar
  int eigengap_position = 0;      // 1-based r; kept indices satisfy l < r
  ColorSpace space = ColorSpace::Lab;
  double sigma2 = 0.0;
};

/// 1-based eigengap position r = argmax_{2 <= l <= l_max} (lambda_l - lambda_{l-1}).
/// When r = 2 the position of the second largest gap is used instead. When that gap is
/// zero (flat spectrum) every index up to l_max is kept, signalled by r = min(l_max, n) + 1.
int find_eigengap(const Vector& eigenvalues, int l_max);

/// N * var(u) for the unit-normalized u.
double discriminability(const Vector& u, VarianceMode mode = VarianceMode::Unit);

/// Keeps eigenvectors 2 <= l < r whose discriminability reaches the threshold; falls
/// back to the most discriminative candidate if the filter removes all of them.
RefinedDiffusion refine_matrix(const SpectralDecomposition& dec, const RefineParams& params);

/// Outcome of the per-seed normalization.
struct NormalizedDiffusion {
  double lambda1_prime_inv = 0.0;  // coefficient of the constant term, 1/lambda'_1
  double a_hat = 0.0;              // q - p
  double p = 0.0;
  double q = 0.0;
  bool degenerate = false;         // p == q, output is 0.5 everywhere
};

struct NormalizedOutput {
  NormalizedDiffusion norm;
  Vector y_hat;
};

/// Re-adds the constant eigenvector with eigenvalue lambda'_1 and rescales the remaining
/// spectrum by 1/a_hat so that the output spans exactly [0, 1].
/// Throws EmptySeed for an all-zero seed.
NormalizedOutput normalize_for_seed(const LowRankDiffusion& op, const Vector& seed);

/// The final N x N matrix [u1, U] diag(1/lambda'_1, 1/(a_hat lambda)) [u1, U]^T
/// for a given normalization.
Matrix normalized_matrix(const LowRankDiffusion& op, const NormalizedDiffusion& norm);

}  // namespace superdiff
