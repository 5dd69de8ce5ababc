#include "superdiff_tools/cli.hpp"

#include <superdiff/eval.hpp>
#include <superdiff/experiments.hpp>
#include <superdiff/ingest.hpp>
#include <superdiff/train.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace superdiff::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RefineParams refine_params(const RunConfig& c) {
  RefineParams r;
  r.var_threshold = c.var_threshold;
  r.l_max = c.l_max;
  if (c.variance_mode == "unit") {
    r.variance_mode = VarianceMode::Unit;
  } else if (c.variance_mode == "scaled255") {
    r.variance_mode = VarianceMode::Scaled255;
  } else {
    throw Error(ErrorCode::InvalidArgument, "variance_mode must be unit or scaled255");
  }
  return r;
}

json config_json(const RunConfig& c) {
  return {{"dataset_root", c.dataset_root.string()},
          {"color_spaces", c.color_spaces},
          {"sigma2_list", c.sigma2_list},
          {"n_superpixels", c.n_superpixels},
          {"compactness", c.compactness},
          {"slic_iterations", c.slic_iterations},
          {"var_threshold", c.var_threshold},
          {"l_max", c.l_max},
          {"variance_mode", c.variance_mode},
          {"eigvec_norm", c.eigvec_norm},
          {"distance", c.distance},
          {"gaussian_variances", c.gaussian_variances},
          {"absorbed_seed", c.absorbed_seed},
          {"use_features", c.use_features},
          {"seed_of_rng", c.seed_of_rng},
          {"output_dir", c.output_dir.string()},
          {"jobs", c.jobs},
          {"split", c.split},
          {"bin_threshold", c.bin_threshold}};
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_manifest(const RunConfig& c, const std::string& command, const std::vector<std::string>& outputs,
                    std::size_t n_images) {
  write_json(c.output_dir / "manifest.json", {{"command", command},
                                              {"settings_hash", settings_hash(c.options())},
                                              {"n_images", n_images},
                                              {"outputs", outputs},
                                              {"config", config_json(c)}});
}

std::vector<std::size_t> select_items(const DatasetIndex& index, const std::string& split) {
  const DatasetSplit s = split_by_parity(index);
  if (split == "train") return s.train;
  if (split == "test") return s.test;
  if (split == "all") {
    std::vector<std::size_t> all(index.entries.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  throw Error(ErrorCode::InvalidArgument, "split must be train, test or all");
}

DatasetIndex open_dataset(const RunConfig& c) {
  if (c.dataset_root.empty()) throw Error(ErrorCode::InvalidArgument, "--dataset is required");
  return index_dataset(c.dataset_root);
}

int cmd_train(const RunConfig& c) {
  const DatasetIndex index = open_dataset(c);
  const auto items = select_items(index, c.split);
  const ExperimentOptions opt = c.options();
  const TrainingRun run = train_on(index, items, opt);
  save_weights(c.output_dir / "weights.json", run.weights);

  int failed = 0;
  for (const ColumnBank& b : run.banks) failed += b.failed_cells;
  const Vector abs_w = run.weights.w.cwiseAbs();
  std::vector<int> order(static_cast<std::size_t>(abs_w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return abs_w(a) > abs_w(b); });
  json top = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(10, order.size()); ++k) {
    const int i = order[k];
    const ColumnLabel& l = run.weights.layout[static_cast<std::size_t>(i)];
    top.push_back({{"matrix_id", l.matrix_id}, {"seed_id", l.seed_id}, {"w", run.weights.w(i)}});
  }
  write_json(c.output_dir / "training_report.json",
             {{"settings_hash", run.weights.settings_hash},
              {"training_loss", run.weights.training_loss},
              {"n_samples", run.weights.n_samples},
              {"n_columns", run.weights.n_columns()},
              {"failed_cells", failed},
              {"abs_w", {{"min", abs_w.minCoeff()}, {"max", abs_w.maxCoeff()}, {"mean", abs_w.mean()}}},
              {"top_columns", top}});
  write_manifest(c, "train", {"weights.json", "training_report.json"}, items.size());
  std::cout << "trained on " << items.size() << " images, C = " << run.weights.n_columns()
            << ", J = " << run.weights.training_loss << '\n';
  return 0;
}

int cmd_detect(const RunConfig& c, const fs::path& weights_path, const std::vector<fs::path>& images,
               const fs::path& features_dir) {
  const WeightVector w = load_weights(weights_path);
  const ExperimentOptions opt = c.options();
  int status = 0;
  std::vector<std::string> outputs;
  for (const fs::path& image : images) {
    try {
      ImageSample sample = load_sample(image);
      sample.id = image.stem().string();
      std::optional<fs::path> feature_path;
      if (!features_dir.empty()) feature_path = features_dir / (sample.id + ".csv");
      const Detection d = detect(sample, w, opt, feature_path);
      const std::string name = sample.id + ".png";
      write_gray_png(c.output_dir / name, quantize(d.map));
      outputs.push_back(name);
    } catch (const Error& e) {
      std::cerr << "error: " << image.string() << ": " << e.what() << '\n';
      status = 1;
    }
  }
  write_manifest(c, "detect", outputs, images.size());
  return status;
}

int cmd_evaluate(const RunConfig& c, const fs::path& weights_path) {
  const DatasetIndex index = open_dataset(c);
  const auto items = select_items(index, c.split);
  const WeightVector w = load_weights(weights_path);
  const EvaluationRun run = evaluate_on(index, items, w, c.options());
  const std::string hash = settings_hash(c.options());
  write_metrics_json(c.output_dir / "metrics.json", run.metrics, hash);
  write_curve_csv(c.output_dir / "pr.csv", run.pr);
  write_manifest(c, "evaluate", {"metrics.json", "pr.csv"}, items.size());
  std::cout << "F = " << run.metrics.f_measure << ", AUC = " << run.metrics.auc << ", MOR = " << run.metrics.mor << '\n';
  return 0;
}

int cmd_promote(const RunConfig& c, const std::string& method, const std::string& matrix) {
  const DatasetIndex index = open_dataset(c);
  const auto items = select_items(index, c.split);
  const PromotionResult r = promote(index, items, method, matrix_choice_from_string(matrix), c.options());
  const std::string hash = settings_hash(c.options());
  write_curve_csv(c.output_dir / "pr_before.csv", r.before);
  write_curve_csv(c.output_dir / "pr_after.csv", r.after);
  write_metrics_json(c.output_dir / "metrics_before.json", r.before_metrics, hash);
  write_metrics_json(c.output_dir / "metrics_after.json", r.after_metrics, hash);
  write_manifest(c, "promote", {"pr_before.csv", "pr_after.csv", "metrics_before.json", "metrics_after.json"},
                 items.size());
  std::cout << "F before = " << r.before_metrics.f_measure << ", after = " << r.after_metrics.f_measure << '\n';
  return 0;
}

int cmd_cose(const RunConfig& c, const std::string& matrix, double stop_c) {
  const DatasetIndex index = open_dataset(c);
  const auto items = select_items(index, c.split);
  OmpParams omp;
  omp.stop_c = stop_c;
  omp.bin_threshold = c.bin_threshold;
  const CoseRun run = cose(index, items, matrix_choice_from_string(matrix), c.options(), omp);
  write_curve_csv(c.output_dir / "cose.csv", run.curve);
  write_manifest(c, "cose", {"cose.csv"}, items.size());
  if (!run.curve.points.empty()) std::cout << "COSE at 100% = " << run.curve.points.back().second << '\n';
  return 0;
}

int cmd_ablate(const RunConfig& c) {
  const DatasetIndex index = open_dataset(c);
  const DatasetSplit split = split_by_parity(index);
  const std::vector<StageResult> stages = ablate(index, split, c.options());
  json report = json::array();
  std::vector<std::string> outputs{"ablation.json"};
  for (const StageResult& s : stages) {
    json entry = {{"stage", s.name}, {"skipped", s.skipped}, {"note", s.note}};
    if (!s.skipped) {
      write_curve_csv(c.output_dir / (s.name + ".csv"), s.pr);
      outputs.push_back(s.name + ".csv");
      entry["precision"] = s.metrics.precision;
      entry["recall"] = s.metrics.recall;
      entry["f_measure"] = s.metrics.f_measure;
      entry["auc"] = s.metrics.auc;
      entry["mor"] = s.metrics.mor;
      if (s.training_loss) entry["training_loss"] = *s.training_loss;
      std::cout << s.name << ": F = " << s.metrics.f_measure << '\n';
    } else {
      std::cout << s.name << ": skipped (" << s.note << ")\n";
    }
    report.push_back(entry);
  }
  write_json(c.output_dir / "ablation.json", {{"settings_hash", settings_hash(c.options())}, {"stages", report}});
  write_manifest(c, "ablate", outputs, index.entries.size());
  return 0;
}

}  // namespace

ExperimentOptions RunConfig::options() const {
  ExperimentOptions o;
  o.slic.n_target = n_superpixels;
  o.slic.compactness = compactness;
  o.slic.iterations = slic_iterations;
  o.grid.spaces.clear();
  for (const std::string& s : color_spaces) o.grid.spaces.push_back(color_space_from_string(s));
  o.grid.sigma2_list = sigma2_list;
  o.grid.gaussian_variances = gaussian_variances;
  o.grid.absorbed_seed = absorbed_seed;
  o.grid.refine = refine_params(*this);
  if (eigvec_norm == "euclidean") {
    o.grid.eigvec_norm = EigvecNorm::Euclidean;
  } else if (eigvec_norm == "d-orthonormal") {
    o.grid.eigvec_norm = EigvecNorm::DOrthonormal;
  } else {
    throw Error(ErrorCode::InvalidArgument, "eigvec_norm must be euclidean or d-orthonormal");
  }
  if (distance == "euclidean") {
    o.grid.distance = DistanceForm::Euclidean;
  } else if (distance == "squared") {
    o.grid.distance = DistanceForm::Squared;
  } else {
    throw Error(ErrorCode::InvalidArgument, "distance must be euclidean or squared");
  }
  o.use_features = use_features;
  o.jobs = std::max(1, jobs);
  return o;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Super diffusion salient object detection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  RunConfig c;
  app.add_option("--dataset,dataset_root", c.dataset_root, "Dataset root (images/, masks/, features/, seedmaps/)");
  app.add_option("--color-spaces,color_spaces", c.color_spaces, "Color spaces")->delimiter(',');
  app.add_option("--sigma2,sigma2_list", c.sigma2_list, "Affinity scales")->delimiter(',');
  app.add_option("--n-superpixels,n_superpixels", c.n_superpixels, "SLIC target count");
  app.add_option("--compactness", c.compactness, "SLIC compactness");
  app.add_option("--slic-iterations,slic_iterations", c.slic_iterations, "SLIC iterations");
  app.add_option("--var-threshold,var_threshold", c.var_threshold, "Eigenvector discriminability threshold");
  app.add_option("--l-max,l_max", c.l_max, "Eigengap search bound");
  app.add_option("--variance-mode,variance_mode", c.variance_mode, "unit or scaled255");
  app.add_option("--eigvec-norm,eigvec_norm", c.eigvec_norm, "euclidean or d-orthonormal");
  app.add_option("--distance", c.distance, "euclidean or squared feature distance");
  app.add_option("--gaussian-variances,gaussian_variances", c.gaussian_variances, "Center-prior seed variances")
      ->delimiter(',');
  app.add_option("--absorbed-seed,absorbed_seed", c.absorbed_seed, "Include the absorbed-time seed");
  app.add_option("--use-features,use_features", c.use_features, "Append the feature block when available");
  app.add_option("--seed,seed_of_rng", c.seed_of_rng, "RNG seed recorded in the manifest");
  app.add_option("--output,output_dir", c.output_dir, "Output directory");
  app.add_option("--jobs,jobs", c.jobs, "Worker threads")->envname("SUPERDIFF_JOBS");
  app.add_option("--split,split", c.split, "train, test or all");
  app.add_option("--bin-threshold,bin_threshold", c.bin_threshold, "OMP binarization threshold");

  auto* train = app.add_subcommand("train", "Fit weights on the training split")->fallthrough();
  fs::path weights;
  std::vector<fs::path> images;
  fs::path features_dir;
  auto* detect_cmd = app.add_subcommand("detect", "Saliency maps for images")->fallthrough();
  detect_cmd->add_option("--weights", weights, "Weight file")->required();
  detect_cmd->add_option("--features-dir", features_dir, "Directory of <id>.csv feature files");
  detect_cmd->add_option("images", images, "Input images")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Metrics and PR curve")->fallthrough();
  evaluate->add_option("--weights", weights, "Weight file")->required();
  std::string method = "noisy";
  std::string matrix = "refined";
  auto* promote_cmd = app.add_subcommand("promote", "PR of external maps before and after diffusion")->fallthrough();
  promote_cmd->add_option("--method", method, "Seed-map directory name under seedmaps/");
  promote_cmd->add_option("--matrix", matrix, "refined, l_tilde or l_rw_tilde");
  double stop_c = 0.0;
  auto* cose_cmd = app.add_subcommand("cose", "Constrained optimal seed efficiency curve")->fallthrough();
  cose_cmd->add_option("--matrix", matrix, "refined, l_tilde or l_rw_tilde");
  cose_cmd->add_option("--stop", stop_c, "Residual norm stopping constant");
  auto* ablate_cmd = app.add_subcommand("ablate", "S0..S7 ablation")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const bool split_given = app.count("--split") > 0;
  try {
    if (train->parsed()) return cmd_train(c);
    if (detect_cmd->parsed()) return cmd_detect(c, weights, images, features_dir);
    if (!split_given) c.split = "all";
    if (evaluate->parsed()) {
      if (!split_given) c.split = "test";
      return cmd_evaluate(c, weights);
    }
    if (promote_cmd->parsed()) return cmd_promote(c, method, matrix);
    if (cose_cmd->parsed()) return cmd_cose(c, matrix, stop_c);
    if (ablate_cmd->parsed()) return cmd_ablate(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"superdiff"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace superdiff::tools
