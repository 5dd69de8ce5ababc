#include "superdiff/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace superdiff {

namespace {

constexpr double kDegenerateGap = 1e-10;
constexpr double kSingular = 1e-12;

double population_variance_unit(const Eigen::Ref<const Vector>& u) {
  const double norm = u.norm();
  if (norm == 0.0) return 0.0;
  const Vector v = u / norm;
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

void fix_sign(Eigen::Ref<Vector> u) {
  Eigen::Index arg = 0;
  u.cwiseAbs().maxCoeff(&arg);
  if (u(arg) < 0.0) u = -u;
}

}  // namespace

SpectralDecomposition decompose(const Matrix& a_matrix, const Vector& degree, EigvecNorm norm) {
  const Eigen::Index n = a_matrix.rows();
  if (a_matrix.cols() != n || degree.size() != n || n == 0) {
    throw Error(ErrorCode::ShapeMismatch, "decompose expects a square matrix and one degree per row");
  }
  if ((degree.array() <= 0.0).any()) throw Error(ErrorCode::InvalidArgument, "degrees must be positive");

  const Vector sqrt_d = degree.cwiseSqrt();
  const Vector inv_sqrt_d = sqrt_d.cwiseInverse();
  Matrix sym = sqrt_d.asDiagonal() * a_matrix * inv_sqrt_d.asDiagonal();
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::NumericalFailure, "operator is not symmetrizable by the given degrees");
  }
  sym = 0.5 * (sym + sym.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigensolver did not converge");

  SpectralDecomposition dec;
  dec.norm = norm;
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = inv_sqrt_d.asDiagonal() * solver.eigenvectors();

  if (norm == EigvecNorm::Euclidean) {
    // Orthonormalize within clusters of (numerically) equal eigenvalues, then normalize.
    Eigen::Index start = 0;
    while (start < n) {
      Eigen::Index end = start + 1;
      while (end < n && dec.eigenvalues(end) - dec.eigenvalues(end - 1) < kDegenerateGap) ++end;
      const Eigen::Index width = end - start;
      if (width > 1) {
        Eigen::HouseholderQR<Matrix> qr(dec.eigenvectors.middleCols(start, width));
        dec.eigenvectors.middleCols(start, width) = qr.householderQ() * Matrix::Identity(n, width);
      } else {
        dec.eigenvectors.col(start).normalize();
      }
      start = end;
    }
    dec.projection_weights = Vector::Ones(n);
  } else {
    dec.projection_weights = degree;
  }
  for (Eigen::Index l = 0; l < n; ++l) fix_sign(dec.eigenvectors.col(l));

  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < n; ++l) {
    const double v = population_variance_unit(dec.eigenvectors.col(l));
    if (v < best - 1e-15) {
      best = v;
      dec.constant_index = static_cast<int>(l);
    }
  }
  return dec;
}

SpectralDecomposition decompose_rw_tilde(const SaliencyGraph& g, EigvecNorm norm) {
  return decompose(laplacians(g).l_rw_tilde, g.degree, norm);
}

SpectralDecomposition decompose_l_tilde(const SaliencyGraph& g) {
  return decompose(laplacians(g).l_tilde, Vector::Ones(g.n), EigvecNorm::Euclidean);
}

Matrix diffusion_map(const SpectralDecomposition& dec) {
  if ((dec.eigenvalues.array() <= kSingular).any()) {
    throw Error(ErrorCode::SingularEigenvalue, "diffusion map needs positive eigenvalues");
  }
  return dec.eigenvectors * dec.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
}

Vector diffusion_apply(const SpectralDecomposition& dec, const Vector& seed) {
  if (seed.size() != dec.size()) throw Error(ErrorCode::ShapeMismatch, "seed length differs from node count");
  if ((dec.eigenvalues.array() <= kSingular).any()) {
    throw Error(ErrorCode::SingularEigenvalue, "eigenvalue below 1e-12");
  }
  const Vector coeff = (dec.eigenvectors.transpose() * dec.projection_weights.cwiseProduct(seed))
                           .cwiseQuotient(dec.eigenvalues);
  return dec.eigenvectors * coeff;
}

Matrix diffusion_matrix(const SpectralDecomposition& dec) {
  if ((dec.eigenvalues.array() <= kSingular).any()) {
    throw Error(ErrorCode::SingularEigenvalue, "eigenvalue below 1e-12");
  }
  return dec.eigenvectors * dec.eigenvalues.cwiseInverse().asDiagonal() * dec.eigenvectors.transpose() *
         dec.projection_weights.asDiagonal();
}

Vector neumann_check(const SaliencyGraph& g, const Vector& x, int n_terms) {
  if (x.size() != g.n) throw Error(ErrorCode::ShapeMismatch, "x length differs from node count");
  const Matrix p = kDamping * transition_matrix(g);
  Vector term = x;
  Vector sum = x;
  if (n_terms <= 0) return Vector::Zero(x.size());
  for (int k = 1; k < n_terms; ++k) {
    term = p * term;
    sum += term;
  }
  return sum;
}

}  // namespace superdiff
