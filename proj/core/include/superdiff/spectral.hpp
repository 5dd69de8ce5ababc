#pragma once

#include "superdiff/graph.hpp"
#include "superdiff/types.hpp"

namespace superdiff {

enum class EigvecNorm {
  /// Unit Euclidean norm; the diffusion is re-synthesized as U diag(1/lambda) U^T s.
  Euclidean,
  /// U^T D U = I; the diffusion is U diag(1/lambda) U^T D s, which is the exact inverse
  /// of the random-walk operator.
  DOrthonormal,
};

/// Eigendecomposition A = U diag(lambda) U^-1 of a symmetrizable operator
/// A = D^-1/2 S D^1/2 with S symmetric.
struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column l is u_l
  int constant_index = 0;
  EigvecNorm norm = EigvecNorm::Euclidean;
  /// Elementwise weights applied to a seed before projection: ones for Euclidean,
  /// the degree vector for DOrthonormal.
  Vector projection_weights;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Decomposes `a_matrix`, which must satisfy D^1/2 A D^-1/2 symmetric for D = diag(degree).
/// Pass a vector of ones for an already-symmetric operator such as L~.
/// Eigenvector signs are fixed so the entry of largest magnitude is positive.
/// Throws NumericalFailure when the symmetrized operator is not symmetric or the
/// eigensolver does not converge.
SpectralDecomposition decompose(const Matrix& a_matrix, const Vector& degree,
                                EigvecNorm norm = EigvecNorm::Euclidean);

/// L~_rw = D^-1 (D - 0.99 W) of the graph.
SpectralDecomposition decompose_rw_tilde(const SaliencyGraph& g,
                                         EigvecNorm norm = EigvecNorm::Euclidean);
/// L~ = D - 0.99 W of the graph.
SpectralDecomposition decompose_l_tilde(const SaliencyGraph& g);

/// Rows are the per-node diffusion maps Psi_i = [lambda_l^-1/2 u_l(i)]_l.
Matrix diffusion_map(const SpectralDecomposition& dec);

/// y = U diag(1/lambda) U^T (w .* s). Throws SingularEigenvalue if any lambda <= 1e-12.
Vector diffusion_apply(const SpectralDecomposition& dec, const Vector& seed);

/// Explicit N x N diffusion matrix used by diffusion_apply.
Matrix diffusion_matrix(const SpectralDecomposition& dec);

/// Sum_{n < n_terms} (0.99 D^-1 W)^n x. A test oracle for (I - 0.99 P)^-1 x.
Vector neumann_check(const SaliencyGraph& g, const Vector& x, int n_terms);

}  // namespace superdiff
