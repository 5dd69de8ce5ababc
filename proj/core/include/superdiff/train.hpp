#pragma once

#include "superdiff/features.hpp"
#include "superdiff/graph.hpp"
#include "superdiff/refine.hpp"
#include "superdiff/seeds.hpp"
#include "superdiff/spectral.hpp"
#include "superdiff/superpixel.hpp"
#include "superdiff/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace superdiff {

/// The matrix x seed grid evaluated per image.
struct GridSettings {
  std::vector<ColorSpace> spaces{ColorSpace::Lab, ColorSpace::Rgb, ColorSpace::Hsv};
  std::vector<double> sigma2_list{10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::vector<double> gaussian_variances{0.5, 1.0, 2.0};
  bool absorbed_seed = true;
  RefineParams refine;
  EigvecNorm eigvec_norm = EigvecNorm::Euclidean;
  DistanceForm distance = DistanceForm::Euclidean;
  /// Matrix whose absorbed-time seed is reused by the feature block.
  int feature_absorbed_source = 0;

  int n_matrices() const { return static_cast<int>(spaces.size() * sigma2_list.size()); }
  int n_seeds() const { return static_cast<int>(gaussian_variances.size()) + (absorbed_seed ? 1 : 0); }
  /// Canonical key=value text of every setting that affects the column layout or values.
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
};

struct ColumnLabel {
  int matrix_id;
  int seed_id;
  friend bool operator==(const ColumnLabel&, const ColumnLabel&) = default;
};

/// Per-image matrix H of normalized single-diffusion saliency columns, in lexicographic
/// (matrix_id, seed_id) order.
struct ColumnBank {
  Matrix columns;  // N x C
  std::vector<ColumnLabel> labels;
  int failed_cells = 0;

  int n_nodes() const { return static_cast<int>(columns.rows()); }
  int n_columns() const { return static_cast<int>(columns.cols()); }
};

std::vector<ColumnLabel> column_layout(const GridSettings& settings, bool with_features);

/// Segmentation-wide seeds of the grid for one refined matrix: Gaussian seeds first, then
/// the absorbed-time seed of that matrix.
std::vector<SeedVector> grid_seeds(const SuperpixelSegmentation& seg, const GridSettings& settings,
                                   const LowRankDiffusion& refined);

/// decompose -> refine -> seed -> normalize for every grid cell; the feature block is
/// appended when `features` is non-null. A cell whose eigensolve fails becomes an
/// all-0.5 column and is reported on stderr.
ColumnBank build_column_bank(const SuperpixelSegmentation& seg, const GridSettings& settings,
                             const FeatureBank* features = nullptr);

/// Single refined diffusion of one seed, normalized to [0,1].
Vector single_diffusion(const SuperpixelSegmentation& seg, ColorSpace space, double sigma2,
                        const Vector& seed, const RefineParams& refine,
                        EigvecNorm norm = EigvecNorm::Euclidean,
                        DistanceForm distance = DistanceForm::Euclidean);

/// Sum over samples of H^T H, H^T y and y^T y. Merging is associative.
class NormalEquations {
 public:
  explicit NormalEquations(int n_columns = 0);
  void add(const Matrix& h, const Vector& y_gt);
  void merge(const NormalEquations& other);
  int n_columns() const { return static_cast<int>(hth_.rows()); }
  int n_samples() const { return samples_; }
  const Matrix& hth() const { return hth_; }
  const Vector& hty() const { return hty_; }
  /// Solves (H^T H + eps I) w = H^T y with eps = 1e-8 trace / C.
  Vector solve() const;

 private:
  Matrix hth_;
  Vector hty_;
  int samples_ = 0;
};

struct WeightVector {
  Vector w;
  std::vector<ColumnLabel> layout;
  std::string settings_hash;
  std::string dataset;
  int n_samples = 0;
  double training_loss = 0.0;

  int n_columns() const { return static_cast<int>(w.size()); }
};

/// Closed-form least-squares weights over all samples. Throws InsufficientData when no
/// samples are given and LayoutMismatch on inconsistent column counts.
WeightVector fit_weights(std::span<const ColumnBank> banks, std::span<const Vector> gts);
Vector fit_weights(std::span<const Matrix> hs, std::span<const Vector> gts);

/// J = sum_i ||H(i) w - y_gt(i)||^2.
double training_loss(std::span<const Matrix> hs, std::span<const Vector> gts, const Vector& w);

/// Node predictions H w clamped to [0,1]. Throws LayoutMismatch.
Vector predict_nodes(const ColumnBank& bank, const WeightVector& w);
SaliencyMap infer(const ColumnBank& bank, const WeightVector& w, const SuperpixelSegmentation& seg);

void save_weights(const std::filesystem::path& path, const WeightVector& w);
WeightVector load_weights(const std::filesystem::path& path);

/// 8-bit quantization round(255 v) of a [0,1] map.
Grid<std::uint8_t> quantize(const SaliencyMap& map);

}  // namespace superdiff
