#include "superdiff/train.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace superdiff {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
  return out;
}

bool is_cell_failure(ErrorCode code) {
  return code == ErrorCode::NumericalFailure || code == ErrorCode::SingularEigenvalue ||
         code == ErrorCode::DegenerateGraph || code == ErrorCode::EmptySeed;
}

}  // namespace

std::string GridSettings::canonical() const {
  std::ostringstream os;
  os << "spaces=" << join(spaces, [](ColorSpace s) { return to_string(s); })
     << ";sigma2=" << join(sigma2_list, num) << ";gaussian_variances=" << join(gaussian_variances, num)
     << ";absorbed_seed=" << absorbed_seed << ";drop_constant=" << refine.drop_constant
     << ";eigengap=" << refine.eigengap << ";variance_filter=" << refine.variance_filter
     << ";var_threshold=" << num(refine.var_threshold) << ";l_max=" << refine.l_max
     << ";variance_mode=" << (refine.variance_mode == VarianceMode::Unit ? "unit" : "scaled255")
     << ";eigvec_norm=" << (eigvec_norm == EigvecNorm::Euclidean ? "euclidean" : "d-orthonormal")
     << ";distance=" << (distance == DistanceForm::Euclidean ? "euclidean" : "squared")
     << ";feature_absorbed_source=" << feature_absorbed_source;
  return os.str();
}

std::string GridSettings::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<ColumnLabel> column_layout(const GridSettings& settings, bool with_features) {
  std::vector<ColumnLabel> labels;
  const int m = settings.n_matrices() + (with_features ? 1 : 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < settings.n_seeds(); ++j) labels.push_back({i, j});
  return labels;
}

std::vector<SeedVector> grid_seeds(const SuperpixelSegmentation& seg, const GridSettings& settings,
                                   const LowRankDiffusion& refined) {
  std::vector<SeedVector> seeds;
  for (const double v : settings.gaussian_variances) seeds.push_back(gaussian_seed(seg, v));
  if (settings.absorbed_seed) seeds.push_back(absorbed_time_seed(refined, seg.is_border));
  return seeds;
}

ColumnBank build_column_bank(const SuperpixelSegmentation& seg, const GridSettings& settings,
                             const FeatureBank* features) {
  const int n = seg.n_nodes;
  const int k = settings.n_seeds();
  if (k == 0 || settings.n_matrices() == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix/seed grid");
  ColumnBank bank;
  bank.labels = column_layout(settings, features != nullptr);
  bank.columns = Matrix::Constant(n, static_cast<Eigen::Index>(bank.labels.size()), 0.5);

  std::vector<Vector> gaussians;
  for (const double v : settings.gaussian_variances) gaussians.push_back(gaussian_seed(seg, v).values);
  std::optional<Vector> feature_absorbed;

  auto report = [&](int matrix_id, int seed_id, const Error& e) {
    ++bank.failed_cells;
    std::cerr << "warning: cell (" << matrix_id << "," << seed_id << ") replaced by 0.5: " << e.what() << '\n';
  };

  int matrix_id = 0;
  for (const ColorSpace space : settings.spaces) {
    for (const double sigma2 : settings.sigma2_list) {
      const Eigen::Index base = static_cast<Eigen::Index>(matrix_id) * k;
      try {
        const SaliencyGraph g = build_graph(seg, space, sigma2, settings.distance);
        const RefinedDiffusion refined = refine_matrix(decompose_rw_tilde(g, settings.eigvec_norm), settings.refine);
        for (int j = 0; j < k; ++j) {
          try {
            Vector seed;
            if (j < static_cast<int>(gaussians.size())) {
              seed = gaussians[static_cast<std::size_t>(j)];
            } else {
              seed = absorbed_time_seed(refined.op, seg.is_border).values;
              if (matrix_id == settings.feature_absorbed_source) feature_absorbed = seed;
            }
            bank.columns.col(base + j) = normalize_for_seed(refined.op, seed).y_hat;
          } catch (const Error& e) {
            if (!is_cell_failure(e.code())) throw;
            report(matrix_id, j, e);
          }
        }
      } catch (const Error& e) {
        if (!is_cell_failure(e.code())) throw;
        for (int j = 0; j < k; ++j) report(matrix_id, j, e);
      }
      ++matrix_id;
    }
  }

  if (features) {
    const FeatureDiffusion fd = make_feature_diffusion(*features);
    if (fd.n() != n) throw Error(ErrorCode::ShapeMismatch, "feature rows differ from node count");
    const Eigen::Index base = static_cast<Eigen::Index>(matrix_id) * k;
    for (int j = 0; j < k; ++j) {
      const bool gaussian = j < static_cast<int>(gaussians.size());
      if (!gaussian && !feature_absorbed) {
        report(matrix_id, j, Error(ErrorCode::DegenerateGraph, "no absorbed-time seed available"));
        continue;
      }
      try {
        const Vector& seed = gaussian ? gaussians[static_cast<std::size_t>(j)] : *feature_absorbed;
        bank.columns.col(base + j) = feature_diffusion_apply(fd, seed).y_hat;
      } catch (const Error& e) {
        if (!is_cell_failure(e.code())) throw;
        report(matrix_id, j, e);
      }
    }
  }
  return bank;
}

Vector single_diffusion(const SuperpixelSegmentation& seg, ColorSpace space, double sigma2, const Vector& seed,
                        const RefineParams& refine, EigvecNorm norm, DistanceForm distance) {
  const SaliencyGraph g = build_graph(seg, space, sigma2, distance);
  return normalize_for_seed(refine_matrix(decompose_rw_tilde(g, norm), refine).op, seed).y_hat;
}

NormalEquations::NormalEquations(int n_columns)
    : hth_(Matrix::Zero(n_columns, n_columns)), hty_(Vector::Zero(n_columns)) {}

void NormalEquations::add(const Matrix& h, const Vector& y_gt) {
  if (h.cols() != hth_.rows()) throw Error(ErrorCode::LayoutMismatch, "column count differs from accumulator");
  if (h.rows() != y_gt.size()) throw Error(ErrorCode::ShapeMismatch, "H rows differ from ground-truth length");
  hth_.noalias() += h.transpose() * h;
  hty_.noalias() += h.transpose() * y_gt;
  ++samples_;
}

void NormalEquations::merge(const NormalEquations& other) {
  if (other.n_columns() != n_columns()) throw Error(ErrorCode::LayoutMismatch, "column count differs");
  hth_ += other.hth_;
  hty_ += other.hty_;
  samples_ += other.samples_;
}

Vector NormalEquations::solve() const {
  if (samples_ == 0) throw Error(ErrorCode::InsufficientData, "no training samples");
  const Eigen::Index c = hth_.rows();
  const double trace = hth_.trace();
  const double eps = 1e-8 * (trace > 0.0 ? trace / static_cast<double>(c) : 1.0);
  Matrix system = hth_;
  system.diagonal().array() += eps;
  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "normal equations not solvable");
  Vector w = ldlt.solve(hty_);
  if (!w.allFinite()) throw Error(ErrorCode::NumericalFailure, "non-finite weights");
  return w;
}

Vector fit_weights(std::span<const Matrix> hs, std::span<const Vector> gts) {
  if (hs.empty()) throw Error(ErrorCode::InsufficientData, "no training samples");
  if (hs.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "one ground truth per sample expected");
  NormalEquations eq(static_cast<int>(hs.front().cols()));
  for (std::size_t i = 0; i < hs.size(); ++i) eq.add(hs[i], gts[i]);
  return eq.solve();
}

WeightVector fit_weights(std::span<const ColumnBank> banks, std::span<const Vector> gts) {
  if (banks.empty()) throw Error(ErrorCode::InsufficientData, "no training samples");
  if (banks.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "one ground truth per sample expected");
  std::vector<Matrix> hs;
  hs.reserve(banks.size());
  for (const ColumnBank& b : banks) {
    if (b.n_columns() != banks.front().n_columns() || b.labels != banks.front().labels) {
      throw Error(ErrorCode::LayoutMismatch, "column layouts differ between samples");
    }
    hs.push_back(b.columns);
  }
  WeightVector out;
  out.w = fit_weights(std::span<const Matrix>(hs), gts);
  out.layout = banks.front().labels;
  out.n_samples = static_cast<int>(banks.size());
  out.training_loss = training_loss(hs, gts, out.w);
  return out;
}

double training_loss(std::span<const Matrix> hs, std::span<const Vector> gts, const Vector& w) {
  if (hs.size() != gts.size()) throw Error(ErrorCode::ShapeMismatch, "one ground truth per sample expected");
  double j = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) j += (hs[i] * w - gts[i]).squaredNorm();
  return j;
}

Vector predict_nodes(const ColumnBank& bank, const WeightVector& w) {
  if (bank.n_columns() != w.n_columns() || (!w.layout.empty() && w.layout != bank.labels)) {
    throw Error(ErrorCode::LayoutMismatch, "bank has " + std::to_string(bank.n_columns()) +
                                               " columns, weights expect " + std::to_string(w.n_columns()));
  }
  return (bank.columns * w.w).cwiseMax(0.0).cwiseMin(1.0);
}

SaliencyMap infer(const ColumnBank& bank, const WeightVector& w, const SuperpixelSegmentation& seg) {
  if (bank.n_nodes() != seg.n_nodes) throw Error(ErrorCode::LayoutMismatch, "bank rows differ from node count");
  return paint(seg, predict_nodes(bank, w));
}

void save_weights(const std::filesystem::path& path, const WeightVector& w) {
  nlohmann::json j;
  j["format"] = "superdiff-weights/1";
  j["settings_hash"] = w.settings_hash;
  j["dataset"] = w.dataset;
  j["n_samples"] = w.n_samples;
  j["n_columns"] = w.n_columns();
  j["training_loss"] = w.training_loss;
  nlohmann::json layout = nlohmann::json::array();
  for (const ColumnLabel& l : w.layout) layout.push_back({l.matrix_id, l.seed_id});
  j["column_layout"] = layout;
  j["w"] = std::vector<double>(w.w.data(), w.w.data() + w.w.size());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

WeightVector load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    WeightVector w;
    w.settings_hash = j.at("settings_hash").get<std::string>();
    w.dataset = j.value("dataset", "");
    w.n_samples = j.value("n_samples", 0);
    w.training_loss = j.value("training_loss", 0.0);
    const auto values = j.at("w").get<std::vector<double>>();
    w.w = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    for (const auto& l : j.at("column_layout")) w.layout.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
    if (w.layout.size() != values.size() || j.at("n_columns").get<std::size_t>() != values.size()) {
      throw Error(ErrorCode::LayoutMismatch, "weight file layout disagrees with its values");
    }
    if (!w.w.allFinite()) throw Error(ErrorCode::ParseError, "non-finite weight");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

Grid<std::uint8_t> quantize(const SaliencyMap& map) {
  Grid<std::uint8_t> out(map.rows, map.cols);
  for (std::size_t i = 0; i < map.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(map.data[i], 0.0, 1.0) * 255.0));
  }
  return out;
}

}  // namespace superdiff
