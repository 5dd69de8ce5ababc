#pragma once

#include "superdiff/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace superdiff {

using GrayMap = Grid<std::uint8_t>;

enum class CurveKind { PR, ROC, COSE };

struct CurveSeries {
  CurveKind kind = CurveKind::PR;
  std::vector<std::pair<double, double>> points;  // sorted by x
  int n_samples_averaged = 0;
};

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double auc = 0.0;
  double mor = 0.0;
};

inline constexpr double kBetaSquared = 0.3;

/// (1 + b2) P R / (b2 P + R); zero when both are zero.
double f_beta(double precision, double recall, double beta2 = kBetaSquared);

/// min(2 mean(map), 255) on the 8-bit scale.
double adaptive_threshold(const GrayMap& map);

/// Precision/recall at the adaptive threshold. Empty predictions have precision 1.
/// Throws EmptyGroundTruth / ShapeMismatch.
MetricReport f_measure(const GrayMap& map, const Mask& gt);

/// Trapezoidal area under the ROC traced by thresholds 0..255.
double auc(const GrayMap& map, const Mask& gt);

/// |B and GT| / |B or GT| with B the adaptive-threshold binarization.
double mor(const GrayMap& map, const Mask& gt);

/// All five protocols on one image.
MetricReport evaluate_image(const GrayMap& map, const Mask& gt);

/// Per-threshold precision/recall sums; an associative reduction over images.
class PrAccumulator {
 public:
  /// Returns false (and records nothing) when the ground truth is empty.
  bool add(const GrayMap& map, const Mask& gt);
  void merge(const PrAccumulator& other);
  int count() const { return count_; }
  CurveSeries curve() const;
  /// Precision and recall averaged over images at threshold t.
  std::pair<double, double> at(int threshold) const;

 private:
  std::array<double, 256> precision_{};
  std::array<double, 256> recall_{};
  int count_ = 0;
};

/// Averaged PR over thresholds 0..255 (binarize map >= t). Images with empty ground truth
/// are skipped with a warning on stderr.
CurveSeries pr_curve(std::span<const GrayMap> maps, std::span<const Mask> gts);

/// Dataset means: precision/recall/AUC/MOR averaged over images, F from the averaged
/// precision and recall.
class MetricAccumulator {
 public:
  bool add(const GrayMap& map, const Mask& gt);
  void merge(const MetricAccumulator& other);
  int count() const { return count_; }
  MetricReport mean() const;

 private:
  MetricReport sum_{};
  int count_ = 0;
};

MetricReport evaluate_dataset(std::span<const GrayMap> maps, std::span<const Mask> gts);

// Adapted orthogonal matching pursuit.

struct OmpStep {
  double r;  // nonnegative seed percentage, 100 ||s||_0 / ||GT||_0
  double a;  // accuracy (||GT|| - ||res~||) / ||GT||
};

struct OmpResult {
  Vector seed;
  std::vector<int> selected;     // in selection order
  std::vector<OmpStep> trace;    // trace[0] is the empty seed
  std::vector<double> ls_residual;  // ||GT - A(:,Inds) s|| after each iteration
};

struct OmpParams {
  double stop_c = 0.0;
  int max_iterations = 100;
  double bin_threshold = 0.5;  // after min-max normalization
};

/// Binarization used for the adapted residual: min-max normalize then threshold.
Vector binarize(const Vector& x, double threshold = 0.5);

/// Greedy nonnegative sparse fit of a binary node ground truth with the columns of a
/// diffusion matrix. Selection is restricted to foreground nodes and driven by the
/// binarized residual. Throws EmptyForeground.
OmpResult adapted_omp(const Matrix& a_inv, const Vector& gt_nodes, const OmpParams& params = {});

/// Lawson-Hanson active-set solution of min ||A x - b|| subject to x >= 0.
Vector nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

/// Linear interpolation of a trace onto r = 1..100, flat beyond its last point.
std::vector<double> interpolate_trace(std::span<const OmpStep> trace);

/// Average of interpolated traces.
CurveSeries cose_curve(std::span<const std::vector<OmpStep>> traces);

std::string curve_header(CurveKind kind);
void write_curve_csv(const std::filesystem::path& path, const CurveSeries& curve);
std::string curve_csv(const CurveSeries& curve);
void write_metrics_json(const std::filesystem::path& path, const MetricReport& report,
                        const std::string& settings_hash);

}  // namespace superdiff
