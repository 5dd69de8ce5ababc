#pragma once

#include "superdiff/ingest.hpp"
#include "superdiff/types.hpp"

#include <array>
#include <vector>

namespace superdiff {

struct SlicParams {
  int n_target = 200;
  double compactness = 10.0;
  int iterations = 10;
};

struct SuperpixelSegmentation {
  Grid<int> labels;                    // node id per pixel, in [0, n_nodes)
  int n_nodes = 0;
  Matrix centroids;                    // N x 2, (row, col) in pixels
  std::array<Matrix, 3> mean_feature;  // indexed by ColorSpace, each N x 3
  std::vector<int> pixel_count;
  std::vector<bool> is_border;         // owns a pixel on the outer one-pixel ring

  const Matrix& features(ColorSpace space) const {
    return mean_feature[static_cast<std::size_t>(space)];
  }
};

/// SLIC over Lab + position, followed by a connectivity pass that merges every orphan
/// component into its largest adjacent superpixel. Node ids are assigned in raster order
/// of first appearance, so the result is deterministic.
SuperpixelSegmentation segment(const ImageSample& sample, const SlicParams& params = {});

/// Recomputes centroids, mean features, pixel counts and border flags from a label map.
/// Labels must already be compact in [0, n_nodes).
SuperpixelSegmentation segmentation_from_labels(const RgbImage& pixels, Grid<int> labels);

/// Unordered pairs (i < j) of nodes sharing a 4-connected pixel boundary.
std::vector<std::vector<int>> node_neighbors(const SuperpixelSegmentation& seg);

/// Node-level ground truth: 1 when at least half of a node's pixels are salient.
Vector node_ground_truth(const SuperpixelSegmentation& seg, const Mask& mask);

/// Mean of a per-pixel map over each node.
Vector node_means(const SuperpixelSegmentation& seg, const Grid<double>& values);

/// Paints node values onto the pixel grid.
SaliencyMap paint(const SuperpixelSegmentation& seg, const Vector& node_values);

}  // namespace superdiff
