#pragma once

#include <superdiff/experiments.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace superdiff::tools {

struct RunConfig {
  std::filesystem::path dataset_root;
  std::vector<std::string> color_spaces{"lab", "rgb", "hsv"};
  std::vector<double> sigma2_list{10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  int n_superpixels = 200;
  double compactness = 10.0;
  int slic_iterations = 10;
  double var_threshold = 0.05;
  int l_max = 30;
  std::string variance_mode = "unit";
  std::string eigvec_norm = "euclidean";
  std::string distance = "euclidean";
  std::vector<double> gaussian_variances{0.5, 1.0, 2.0};
  bool absorbed_seed = true;
  bool use_features = true;
  int seed_of_rng = 0;
  std::filesystem::path output_dir = "out";
  int jobs = 1;
  std::string split = "train";
  double bin_threshold = 0.5;

  ExperimentOptions options() const;
};

/// Entry point of the `superdiff` executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace superdiff::tools
