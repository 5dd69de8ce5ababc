#pragma once

#include "superdiff/eval.hpp"
#include "superdiff/ingest.hpp"
#include "superdiff/superpixel.hpp"
#include "superdiff/train.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace superdiff {

struct ExperimentOptions {
  SlicParams slic;
  GridSettings grid;
  bool use_features = true;
  int jobs = 1;
};

/// Hash of the grid, SLIC and feature settings; stored in every output.
std::string settings_hash(const ExperimentOptions& options);

/// The three diffusion matrices compared in the promotion and COSE experiments, all built
/// on the Lab graph with sigma2 = 10.
enum class MatrixChoice { Refined, LTilde, LRwTilde };
std::string to_string(MatrixChoice choice);
MatrixChoice matrix_choice_from_string(const std::string& name);

inline constexpr double kComparisonSigma2 = 10.0;

/// Explicit diffusion matrix for a choice. Refined is the eigengap/variance-refined
/// operator without the per-seed normalization.
Matrix comparison_matrix(const SuperpixelSegmentation& seg, MatrixChoice choice,
                         const GridSettings& grid);

/// Min-max normalization to [0,1]; constant vectors map to 0.5.
Vector minmax(const Vector& v);

struct TrainingRun {
  WeightVector weights;
  std::vector<ColumnBank> banks;
  std::vector<Vector> node_gts;
};

/// Segments every listed image, builds its column bank and fits w.
TrainingRun train_on(const DatasetIndex& index, const std::vector<std::size_t>& items,
                     const ExperimentOptions& options);

struct Detection {
  SuperpixelSegmentation seg;
  ColumnBank bank;
  SaliencyMap map;
};

/// Full inference on one image. Features are loaded when the weights expect a feature block.
Detection detect(const ImageSample& sample, const WeightVector& w, const ExperimentOptions& options,
                 const std::optional<std::filesystem::path>& feature_path);

struct EvaluationRun {
  MetricReport metrics;
  CurveSeries pr;
};

EvaluationRun evaluate_on(const DatasetIndex& index, const std::vector<std::size_t>& items,
                          const WeightVector& w, const ExperimentOptions& options);

struct PromotionResult {
  CurveSeries before;
  CurveSeries after;
  MetricReport before_metrics;
  MetricReport after_metrics;
};

/// PR of raw external maps against PR of the same maps used as diffusion seeds.
PromotionResult promote(const DatasetIndex& index, const std::vector<std::size_t>& items,
                        const std::string& method, MatrixChoice choice,
                        const ExperimentOptions& options);

struct CoseRun {
  CurveSeries curve;
  std::vector<std::vector<OmpStep>> traces;
};

CoseRun cose(const DatasetIndex& index, const std::vector<std::size_t>& items, MatrixChoice choice,
             const ExperimentOptions& options, const OmpParams& omp = {});

struct StageResult {
  std::string name;
  bool skipped = false;
  std::string note;
  CurveSeries pr;
  MetricReport metrics;
  std::optional<double> training_loss;  // S4 and later
};

/// S0..S7: raw diffusion, constant vector dropped, eigengap, variance filter, then
/// trained integration over color spaces, scales, seeds and the feature block.
std::vector<StageResult> ablate(const DatasetIndex& index, const DatasetSplit& split,
                                const ExperimentOptions& options);

}  // namespace superdiff
