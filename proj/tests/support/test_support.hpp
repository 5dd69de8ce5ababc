#pragma once

#include <superdiff/graph.hpp>
#include <superdiff/ingest.hpp>
#include <superdiff/superpixel.hpp>
#include <superdiff/types.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>

namespace superdiff::fixtures {

/// Symmetric affinity with unit diagonal, a random spanning path and random extra edges.
inline Matrix random_affinity(int n, std::mt19937_64& rng, double density = 0.4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, i) = 1.0;
  for (int i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = 0.05 + 0.95 * u(rng);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (u(rng) < density) w(i, j) = w(j, i) = 0.05 + 0.95 * u(rng);
    }
  }
  return w;
}

inline SaliencyGraph random_graph(int n, std::mt19937_64& rng, double density = 0.4) {
  return graph_from_affinity(random_affinity(n, rng, density));
}

inline Vector random_seed(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector s(n);
  for (int i = 0; i < n; ++i) s(i) = u(rng);
  return s;
}

inline RgbImage solid_image(int rows, int cols, Rgb color) { return RgbImage(rows, cols, color); }

/// rows x cols image tiled by `block` x `block` labels in raster order.
inline Grid<int> block_labels(int rows, int cols, int block) {
  Grid<int> labels(rows, cols);
  const int per_row = (cols + block - 1) / block;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) labels.at(r, c) = (r / block) * per_row + c / block;
  return labels;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("superdiff_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace superdiff::fixtures
