#include "superdiff/experiments.hpp"

#include "superdiff/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iostream>

namespace superdiff {

namespace {

struct Prepared {
  SuperpixelSegmentation seg;
  Mask mask;
  Vector gt_nodes;
  std::optional<FeatureBank> features;
};

Prepared prepare(const DatasetEntry& entry, const ExperimentOptions& options, bool want_features) {
  if (!entry.mask_path) throw Error(ErrorCode::EmptyGroundTruth, "no mask for image " + entry.id);
  ImageSample sample = load_sample(entry.image_path, entry.mask_path);
  Prepared p;
  p.seg = segment(sample, options.slic);
  p.mask = std::move(*sample.gt_mask);
  p.gt_nodes = node_ground_truth(p.seg, p.mask);
  if (want_features && entry.feature_path) p.features = load_feature_bank(*entry.feature_path, p.seg);
  return p;
}

bool all_have_features(const DatasetIndex& index, const std::vector<std::size_t>& items) {
  return std::all_of(items.begin(), items.end(), [&](std::size_t i) { return index.entries[i].feature_path.has_value(); });
}

Vector clamp01(const Vector& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

// Per-image PR and metric accumulators reduced in item order.
struct Scores {
  PrAccumulator pr;
  MetricAccumulator metrics;

  void add(const GrayMap& map, const Mask& gt, const std::string& id) {
    if (!pr.add(map, gt)) {
      std::cerr << "warning: " << id << " has empty ground truth, skipped\n";
      return;
    }
    metrics.add(map, gt);
  }
  void merge(const Scores& other) {
    pr.merge(other.pr);
    metrics.merge(other.metrics);
  }
};

Scores reduce(const std::vector<Scores>& parts) {
  Scores total;
  for (const Scores& s : parts) total.merge(s);
  return total;
}

int index_of(const std::vector<double>& values, double target) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == target) return static_cast<int>(i);
  return 0;
}

Matrix select_columns(const Matrix& h, const std::vector<Eigen::Index>& cols) {
  Matrix out(h.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = h.col(cols[k]);
  return out;
}

}  // namespace

std::string settings_hash(const ExperimentOptions& options) {
  GridSettings g = options.grid;
  std::uint64_t h = 1469598103934665603ULL;
  char buf[96];
  std::snprintf(buf, sizeof buf, ";slic=%d,%.17g,%d;features=%d", options.slic.n_target, options.slic.compactness,
                options.slic.iterations, options.use_features ? 1 : 0);
  for (const unsigned char c : g.canonical() + buf) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(MatrixChoice choice) {
  switch (choice) {
    case MatrixChoice::Refined: return "refined";
    case MatrixChoice::LTilde: return "l_tilde";
    case MatrixChoice::LRwTilde: return "l_rw_tilde";
  }
  return "refined";
}

MatrixChoice matrix_choice_from_string(const std::string& name) {
  if (name == "refined") return MatrixChoice::Refined;
  if (name == "l_tilde") return MatrixChoice::LTilde;
  if (name == "l_rw_tilde") return MatrixChoice::LRwTilde;
  throw Error(ErrorCode::InvalidArgument, "unknown matrix '" + name + "' (refined, l_tilde, l_rw_tilde)");
}

Matrix comparison_matrix(const SuperpixelSegmentation& seg, MatrixChoice choice, const GridSettings& grid) {
  const SaliencyGraph g = build_graph(seg, ColorSpace::Lab, kComparisonSigma2, grid.distance);
  switch (choice) {
    case MatrixChoice::Refined:
      return refine_matrix(decompose_rw_tilde(g, grid.eigvec_norm), grid.refine).op.matrix();
    case MatrixChoice::LTilde:
      return diffusion_matrix(decompose_l_tilde(g));
    case MatrixChoice::LRwTilde:
      return diffusion_matrix(decompose_rw_tilde(g, EigvecNorm::Euclidean));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown matrix choice");
}

Vector minmax(const Vector& v) {
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) return Vector::Constant(v.size(), 0.5);
  return (v.array() - lo) / (hi - lo);
}

TrainingRun train_on(const DatasetIndex& index, const std::vector<std::size_t>& items,
                     const ExperimentOptions& options) {
  if (items.empty()) throw Error(ErrorCode::InsufficientData, "no training images");
  const bool features = options.use_features && all_have_features(index, items);
  if (options.use_features && !features) std::cerr << "warning: feature files missing, training without feature block\n";

  TrainingRun run;
  run.banks.resize(items.size());
  run.node_gts.resize(items.size());
  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const Prepared p = prepare(index.entries[items[k]], options, features);
    run.banks[k] = build_column_bank(p.seg, options.grid, p.features ? &*p.features : nullptr);
    run.node_gts[k] = p.gt_nodes;
  });
  run.weights = fit_weights(run.banks, run.node_gts);
  run.weights.settings_hash = settings_hash(options);
  run.weights.dataset = index.root.filename().string();
  return run;
}

Detection detect(const ImageSample& sample, const WeightVector& w, const ExperimentOptions& options,
                 const std::optional<std::filesystem::path>& feature_path) {
  const bool with_features = w.layout == column_layout(options.grid, true);
  if (!with_features && w.layout != column_layout(options.grid, false)) {
    throw Error(ErrorCode::LayoutMismatch, "weights were trained with a different grid");
  }
  Detection d;
  d.seg = segment(sample, options.slic);
  std::optional<FeatureBank> fb;
  if (with_features) {
    if (!feature_path) throw Error(ErrorCode::FeatureMissing, "weights expect a feature file for " + sample.id);
    fb = load_feature_bank(*feature_path, d.seg);
  }
  d.bank = build_column_bank(d.seg, options.grid, fb ? &*fb : nullptr);
  d.map = infer(d.bank, w, d.seg);
  return d;
}

EvaluationRun evaluate_on(const DatasetIndex& index, const std::vector<std::size_t>& items, const WeightVector& w,
                          const ExperimentOptions& options) {
  std::vector<Scores> parts(items.size());
  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const DatasetEntry& e = index.entries[items[k]];
    if (!e.mask_path) throw Error(ErrorCode::EmptyGroundTruth, "no mask for image " + e.id);
    const ImageSample sample = load_sample(e.image_path, e.mask_path);
    const Detection d = detect(sample, w, options, e.feature_path);
    parts[k].add(quantize(d.map), *sample.gt_mask, e.id);
  });
  const Scores total = reduce(parts);
  return {total.metrics.mean(), total.pr.curve()};
}

PromotionResult promote(const DatasetIndex& index, const std::vector<std::size_t>& items, const std::string& method,
                        MatrixChoice choice, const ExperimentOptions& options) {
  std::vector<Scores> before(items.size());
  std::vector<Scores> after(items.size());
  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const DatasetEntry& e = index.entries[items[k]];
    const Prepared p = prepare(e, options, false);
    const GrayMap raw = read_gray(index.seedmap_path(method, e.id));
    const Vector seed = external_seed(raw, p.seg, method).values;
    const Vector y = minmax(comparison_matrix(p.seg, choice, options.grid) * seed);
    before[k].add(raw, p.mask, e.id);
    after[k].add(quantize(paint(p.seg, y)), p.mask, e.id);
  });
  const Scores b = reduce(before);
  const Scores a = reduce(after);
  return {b.pr.curve(), a.pr.curve(), b.metrics.mean(), a.metrics.mean()};
}

CoseRun cose(const DatasetIndex& index, const std::vector<std::size_t>& items, MatrixChoice choice,
             const ExperimentOptions& options, const OmpParams& omp) {
  std::vector<std::optional<std::vector<OmpStep>>> traces(items.size());
  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const DatasetEntry& e = index.entries[items[k]];
    const Prepared p = prepare(e, options, false);
    try {
      traces[k] = adapted_omp(comparison_matrix(p.seg, choice, options.grid), p.gt_nodes, omp).trace;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::EmptyForeground) throw;
      std::cerr << "warning: " << e.id << " has no foreground node, skipped\n";
    }
  });
  CoseRun run;
  for (auto& t : traces)
    if (t) run.traces.push_back(std::move(*t));
  run.curve = cose_curve(run.traces);
  return run;
}

std::vector<StageResult> ablate(const DatasetIndex& index, const DatasetSplit& split,
                                const ExperimentOptions& options) {
  if (split.train.empty() || split.test.empty()) throw Error(ErrorCode::InsufficientData, "ablation needs train and test images");
  std::vector<std::size_t> items = split.train;
  items.insert(items.end(), split.test.begin(), split.test.end());
  const bool features = options.use_features && all_have_features(index, items);
  if (options.use_features && !features) std::cerr << "warning: feature files missing, S7 skipped\n";

  const GridSettings& grid = options.grid;
  if (grid.gaussian_variances.empty()) throw Error(ErrorCode::InvalidArgument, "ablation needs a Gaussian seed");
  const int gaussian_id = index_of(grid.gaussian_variances, 1.0);
  const int sigma_id = index_of(grid.sigma2_list, kComparisonSigma2);
  const int n_sigma = static_cast<int>(grid.sigma2_list.size());

  RefineParams s0;
  s0.drop_constant = false;
  s0.eigengap = false;
  s0.variance_filter = false;
  RefineParams s1 = s0;
  s1.drop_constant = true;
  RefineParams s2 = s1;
  s2.eigengap = true;
  s2.l_max = grid.refine.l_max;
  RefineParams s3 = grid.refine;
  s3.drop_constant = s3.eigengap = s3.variance_filter = true;
  const std::array<RefineParams, 4> single{s0, s1, s2, s3};

  const std::size_t n_train = split.train.size();
  const std::size_t n_test = split.test.size();
  std::vector<Matrix> banks(items.size());
  std::vector<Vector> gts(items.size());
  std::vector<SuperpixelSegmentation> test_segs(n_test);
  std::vector<Mask> test_masks(n_test);
  std::vector<std::array<Vector, 4>> test_single(n_test);
  std::vector<std::string> test_ids(n_test);

  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const DatasetEntry& e = index.entries[items[k]];
    Prepared p = prepare(e, options, features);
    banks[k] = build_column_bank(p.seg, grid, p.features ? &*p.features : nullptr).columns;
    gts[k] = p.gt_nodes;
    if (k < n_train) return;
    const std::size_t t = k - n_train;
    const Vector seed = gaussian_seed(p.seg, 1.0).values;
    for (std::size_t s = 0; s < single.size(); ++s) {
      try {
        test_single[t][s] = single_diffusion(p.seg, ColorSpace::Lab, kComparisonSigma2, seed, single[s],
                                             grid.eigvec_norm, grid.distance);
      } catch (const Error& err) {
        std::cerr << "warning: " << e.id << " S" << s << " replaced by 0.5: " << err.what() << '\n';
        test_single[t][s] = Vector::Constant(p.seg.n_nodes, 0.5);
      }
    }
    test_segs[t] = std::move(p.seg);
    test_masks[t] = std::move(p.mask);
    test_ids[t] = e.id;
  });

  auto score = [&](const std::function<Vector(std::size_t)>& nodes) {
    Scores total;
    for (std::size_t t = 0; t < n_test; ++t) {
      Scores s;
      s.add(quantize(paint(test_segs[t], nodes(t))), test_masks[t], test_ids[t]);
      total.merge(s);
    }
    return total;
  };

  std::vector<StageResult> stages;
  const std::array<const char*, 4> single_notes{"full spectrum", "constant eigenvector dropped", "eigengap",
                                                "variance filter"};
  for (std::size_t s = 0; s < single.size(); ++s) {
    const Scores sc = score([&](std::size_t t) { return test_single[t][s]; });
    stages.push_back({"S" + std::to_string(s), false, single_notes[s], sc.pr.curve(), sc.metrics.mean(), std::nullopt});
  }

  const int k_seeds = grid.n_seeds();
  const int m_total = grid.n_matrices();
  std::vector<Eigen::Index> s4;
  std::vector<Eigen::Index> s5;
  std::vector<Eigen::Index> s6;
  std::vector<Eigen::Index> s7;
  for (int si = 0; si < static_cast<int>(grid.spaces.size()); ++si) {
    s4.push_back(static_cast<Eigen::Index>((si * n_sigma + sigma_id) * k_seeds + gaussian_id));
  }
  for (int m = 0; m < m_total; ++m) s5.push_back(static_cast<Eigen::Index>(m * k_seeds + gaussian_id));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(m_total) * k_seeds; ++c) s6.push_back(c);
  for (Eigen::Index c = 0; c < banks.front().cols(); ++c) s7.push_back(c);

  struct Trained {
    const char* name;
    const char* note;
    const std::vector<Eigen::Index>* cols;
  };
  const std::array<Trained, 4> trained{Trained{"S4", "color spaces", &s4}, Trained{"S5", "scales", &s5},
                                       Trained{"S6", "seeds", &s6}, Trained{"S7", "feature block", &s7}};
  for (const Trained& st : trained) {
    if (st.cols == &s7 && !features) {
      StageResult r;
      r.name = st.name;
      r.skipped = true;
      r.note = "feature files missing";
      stages.push_back(std::move(r));
      continue;
    }
    std::vector<Matrix> hs(n_train);
    for (std::size_t k = 0; k < n_train; ++k) hs[k] = select_columns(banks[k], *st.cols);
    const std::span<const Vector> train_gts(gts.data(), n_train);
    const Vector w = fit_weights(hs, train_gts);
    const double loss = training_loss(hs, train_gts, w);
    const Scores sc = score([&](std::size_t t) { return clamp01(select_columns(banks[n_train + t], *st.cols) * w); });
    stages.push_back({st.name, false, st.note, sc.pr.curve(), sc.metrics.mean(), loss});
  }
  return stages;
}

}  // namespace superdiff
