#include "superdiff/refine.hpp"

#include <algorithm>
#include <cmath>

namespace superdiff {

Vector LowRankDiffusion::apply(const Vector& seed) const {
  if (seed.size() != basis.rows()) throw Error(ErrorCode::ShapeMismatch, "seed length differs from node count");
  const Vector coeff = (basis.transpose() * projection_weights.cwiseProduct(seed)).cwiseQuotient(eigenvalues);
  return basis * coeff;
}

Matrix LowRankDiffusion::matrix() const {
  return basis * eigenvalues.cwiseInverse().asDiagonal() * basis.transpose() * projection_weights.asDiagonal();
}

int find_eigengap(const Vector& eigenvalues, int l_max) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "eigengap search needs at least 3 eigenvalues");
  const int last = std::clamp(l_max, 2, n);  // 1-based upper bound of the search
  const int keep_all = last + 1;
  const double tol = 1e-12 * eigenvalues.cwiseAbs().maxCoeff();

  auto gap = [&](int l) { return eigenvalues(l - 1) - eigenvalues(l - 2); };
  auto argmax_gap = [&](int skip) {
    int best = -1;
    for (int l = 2; l <= last; ++l) {
      if (l == skip) continue;
      if (best < 0 || gap(l) > gap(best)) best = l;
    }
    return best;
  };

  const int r = argmax_gap(0);
  if (gap(r) <= tol) return keep_all;
  if (r != 2) return r;
  const int second = argmax_gap(2);
  if (second < 0 || gap(second) <= tol) return keep_all;
  return second;
}

double discriminability(const Vector& u, VarianceMode mode) {
  const auto n = static_cast<double>(u.size());
  if (mode == VarianceMode::Unit) {
    const double norm = u.norm();
    if (norm == 0.0) return 0.0;
    const Vector v = u / norm;
    return n * (v.array() - v.mean()).square().mean();
  }
  const double lo = u.minCoeff();
  const double hi = u.maxCoeff();
  if (hi <= lo) return 0.0;
  const Vector v = (u.array() - lo) * (255.0 / (hi - lo));
  return (v.array() - v.mean()).square().mean();
}

RefinedDiffusion refine_matrix(const SpectralDecomposition& dec, const RefineParams& params) {
  const int n = dec.size();
  RefinedDiffusion out;
  out.eigengap_position = n + 1;
  int end = n;  // exclusive 0-based bound
  if (params.eigengap) {
    out.eigengap_position = find_eigengap(dec.eigenvalues, params.l_max);
    end = out.eigengap_position - 1;
  }

  std::vector<int> candidates;
  for (int l = 0; l < end; ++l) {
    if (params.drop_constant && l == dec.constant_index) continue;
    candidates.push_back(l);
  }
  if (candidates.empty()) {
    for (int l = 0; l < n && candidates.empty(); ++l)
      if (l != dec.constant_index) candidates.push_back(l);
  }

  std::vector<int> kept = candidates;
  if (params.variance_filter) {
    kept.clear();
    int best = candidates.front();
    double best_disc = -1.0;
    for (const int l : candidates) {
      const double d = discriminability(dec.eigenvectors.col(l), params.variance_mode);
      if (d >= params.var_threshold) kept.push_back(l);
      if (d > best_disc) {
        best_disc = d;
        best = l;
      }
    }
    if (kept.empty()) kept.push_back(best);
  }

  out.kept_indices = kept;
  out.op.basis.resize(n, static_cast<Eigen::Index>(kept.size()));
  out.op.eigenvalues.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.op.basis.col(static_cast<Eigen::Index>(k)) = dec.eigenvectors.col(kept[k]);
    out.op.eigenvalues(static_cast<Eigen::Index>(k)) = dec.eigenvalues(kept[k]);
  }
  out.op.projection_weights = dec.projection_weights;
  return out;
}

NormalizedOutput normalize_for_seed(const LowRankDiffusion& op, const Vector& seed) {
  const auto n = seed.size();
  if (n != op.basis.rows()) throw Error(ErrorCode::ShapeMismatch, "seed length differs from node count");
  if ((seed.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "seed must be nonnegative");
  const double total = seed.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::EmptySeed, "seed is all zero");

  const Vector y_bar = op.apply(seed);
  NormalizedOutput out;
  out.norm.p = y_bar.minCoeff();
  out.norm.q = y_bar.maxCoeff();
  const double span = out.norm.q - out.norm.p;
  if (span <= 1e-12 * std::max({1.0, std::abs(out.norm.p), std::abs(out.norm.q)})) {
    out.norm.degenerate = true;
    out.norm.lambda1_prime_inv = 0.5 * static_cast<double>(n) / total;
    out.y_hat = Vector::Constant(n, 0.5);
    return out;
  }
  out.norm.a_hat = span;
  // Constant term b 1 with b = p / (p - q); u1 = 1/sqrt(N) gives u1 u1^T s = (sum s / N) 1.
  const double b = -out.norm.p / span;
  out.norm.lambda1_prime_inv = b * static_cast<double>(n) / total;

  const double u1 = 1.0 / std::sqrt(static_cast<double>(n));
  const Vector spectral = (op.basis.transpose() * op.projection_weights.cwiseProduct(seed))
                              .cwiseQuotient(out.norm.a_hat * op.eigenvalues);
  out.y_hat = Vector::Constant(n, u1 * out.norm.lambda1_prime_inv * u1 * total) + op.basis * spectral;
  return out;
}

Matrix normalized_matrix(const LowRankDiffusion& op, const NormalizedDiffusion& norm) {
  const auto n = op.basis.rows();
  const double u1 = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix m = Matrix::Constant(n, n, norm.lambda1_prime_inv * u1 * u1);
  if (!norm.degenerate) {
    m += op.basis * (norm.a_hat * op.eigenvalues).cwiseInverse().asDiagonal() * op.basis.transpose() *
         op.projection_weights.asDiagonal();
  }
  return m;
}

}  // namespace superdiff
