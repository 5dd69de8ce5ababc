#include "superdiff/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace superdiff {

namespace {

struct Center {
  double l, a, b, row, col;
};

double sq(double x) { return x * x; }

double lab_gradient(const Grid<Float3>& lab, int r, int c) {
  if (r <= 0 || c <= 0 || r >= lab.rows - 1 || c >= lab.cols - 1) return std::numeric_limits<double>::infinity();
  double g = 0.0;
  for (int k = 0; k < 3; ++k) {
    g += sq(lab.at(r, c + 1)[k] - lab.at(r, c - 1)[k]) + sq(lab.at(r + 1, c)[k] - lab.at(r - 1, c)[k]);
  }
  return g;
}

std::vector<Center> initial_centers(const Grid<Float3>& lab, int n_target) {
  const int h = lab.rows;
  const int w = lab.cols;
  const double step = std::sqrt(static_cast<double>(h) * w / n_target);
  const int ny = std::max(1, static_cast<int>(std::lround(h / step)));
  const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
  const double sy = static_cast<double>(h) / ny;
  const double sx = static_cast<double>(w) / nx;
  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(ny) * nx);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      int r = std::min(h - 1, static_cast<int>((i + 0.5) * sy));
      int c = std::min(w - 1, static_cast<int>((j + 0.5) * sx));
      // Move to the lowest gradient position in the 3x3 neighbourhood.
      double best = lab_gradient(lab, r, c);
      int br = r;
      int bc = c;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const double g = lab_gradient(lab, r + dr, c + dc);
          if (g < best) {
            best = g;
            br = r + dr;
            bc = c + dc;
          }
        }
      }
      const Float3& p = lab.at(br, bc);
      centers.push_back({p[0], p[1], p[2], static_cast<double>(br), static_cast<double>(bc)});
    }
  }
  return centers;
}

Grid<int> slic_assign(const Grid<Float3>& lab, std::vector<Center>& centers, double compactness,
                      int iterations, double step) {
  const int h = lab.rows;
  const int w = lab.cols;
  Grid<int> labels(h, w, -1);
  Grid<double> dist(h, w);
  const double spatial_weight = sq(compactness / step);
  const int window = static_cast<int>(std::ceil(step));

  for (int it = 0; it < iterations; ++it) {
    std::fill(dist.data.begin(), dist.data.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& ct = centers[k];
      const int r0 = std::max(0, static_cast<int>(ct.row) - window);
      const int r1 = std::min(h - 1, static_cast<int>(ct.row) + window);
      const int c0 = std::max(0, static_cast<int>(ct.col) - window);
      const int c1 = std::min(w - 1, static_cast<int>(ct.col) + window);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          const Float3& p = lab.at(r, c);
          const double d = sq(p[0] - ct.l) + sq(p[1] - ct.a) + sq(p[2] - ct.b) +
                           spatial_weight * (sq(r - ct.row) + sq(c - ct.col));
          if (d < dist.at(r, c)) {
            dist.at(r, c) = d;
            labels.at(r, c) = static_cast<int>(k);
          }
        }
      }
    }
    std::vector<Center> sums(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<int> counts(centers.size(), 0);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int k = labels.at(r, c);
        if (k < 0) continue;
        const Float3& p = lab.at(r, c);
        Center& s = sums[static_cast<std::size_t>(k)];
        s.l += p[0];
        s.a += p[1];
        s.b += p[2];
        s.row += r;
        s.col += c;
        ++counts[static_cast<std::size_t>(k)];
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double n = counts[k];
      centers[k] = {sums[k].l / n, sums[k].a / n, sums[k].b / n, sums[k].row / n, sums[k].col / n};
    }
  }

  // Pixels outside every search window (only possible for degenerate grids) go to the
  // nearest center in the full distance.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (labels.at(r, c) >= 0) continue;
      const Float3& p = lab.at(r, c);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const Center& ct = centers[k];
        const double d = sq(p[0] - ct.l) + sq(p[1] - ct.a) + sq(p[2] - ct.b) +
                         spatial_weight * (sq(r - ct.row) + sq(c - ct.col));
        if (d < best) {
          best = d;
          labels.at(r, c) = static_cast<int>(k);
        }
      }
    }
  }
  return labels;
}

/// Splits every label into 4-connected components, keeps the largest component of each
/// label and merges the rest into their largest adjacent superpixel. Returns compact
/// labels numbered in raster order of first appearance.
Grid<int> enforce_connectivity(const Grid<int>& labels) {
  const int h = labels.rows;
  const int w = labels.cols;
  Grid<int> comp(h, w, -1);
  std::vector<int> comp_label;
  std::vector<int> comp_size;
  std::vector<int> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (comp.at(r, c) >= 0) continue;
      const int id = static_cast<int>(comp_label.size());
      const int lab = labels.at(r, c);
      int size = 0;
      stack.assign(1, r * w + c);
      comp.at(r, c) = id;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        ++size;
        const int pr = p / w;
        const int pc = p % w;
        constexpr int dr[4] = {-1, 1, 0, 0};
        constexpr int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = pr + dr[k];
          const int nc = pc + dc[k];
          if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
          if (comp.at(nr, nc) >= 0 || labels.at(nr, nc) != lab) continue;
          comp.at(nr, nc) = id;
          stack.push_back(nr * w + nc);
        }
      }
      comp_label.push_back(lab);
      comp_size.push_back(size);
    }
  }

  const std::size_t n_comp = comp_label.size();
  const int n_labels = *std::max_element(comp_label.begin(), comp_label.end()) + 1;
  std::vector<int> main_comp(static_cast<std::size_t>(n_labels), -1);
  for (std::size_t k = 0; k < n_comp; ++k) {
    int& m = main_comp[static_cast<std::size_t>(comp_label[k])];
    if (m < 0 || comp_size[k] > comp_size[static_cast<std::size_t>(m)]) m = static_cast<int>(k);
  }

  std::vector<std::vector<int>> adjacent(n_comp);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int a = comp.at(r, c);
      if (c + 1 < w && comp.at(r, c + 1) != a) {
        adjacent[static_cast<std::size_t>(a)].push_back(comp.at(r, c + 1));
        adjacent[static_cast<std::size_t>(comp.at(r, c + 1))].push_back(a);
      }
      if (r + 1 < h && comp.at(r + 1, c) != a) {
        adjacent[static_cast<std::size_t>(a)].push_back(comp.at(r + 1, c));
        adjacent[static_cast<std::size_t>(comp.at(r + 1, c))].push_back(a);
      }
    }
  }
  for (auto& adj : adjacent) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  std::vector<int> resolved(n_comp, -1);
  std::vector<long> label_size(static_cast<std::size_t>(n_labels), 0);
  for (int lab = 0; lab < n_labels; ++lab) {
    const int m = main_comp[static_cast<std::size_t>(lab)];
    if (m < 0) continue;
    resolved[static_cast<std::size_t>(m)] = lab;
    label_size[static_cast<std::size_t>(lab)] = comp_size[static_cast<std::size_t>(m)];
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < n_comp; ++k) {
      if (resolved[k] >= 0) continue;
      int best = -1;
      for (const int nb : adjacent[k]) {
        const int lab = resolved[static_cast<std::size_t>(nb)];
        if (lab < 0) continue;
        if (best < 0 || label_size[static_cast<std::size_t>(lab)] > label_size[static_cast<std::size_t>(best)] ||
            (label_size[static_cast<std::size_t>(lab)] == label_size[static_cast<std::size_t>(best)] && lab < best)) {
          best = lab;
        }
      }
      if (best < 0) continue;
      resolved[k] = best;
      label_size[static_cast<std::size_t>(best)] += comp_size[k];
      changed = true;
    }
  }

  Grid<int> out(h, w);
  std::vector<int> remap(static_cast<std::size_t>(n_labels), -1);
  int next = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int lab = resolved[static_cast<std::size_t>(comp.data[i])];
    int& m = remap[static_cast<std::size_t>(lab)];
    if (m < 0) m = next++;
    out.data[i] = m;
  }
  return out;
}

}  // namespace

SuperpixelSegmentation segment(const ImageSample& sample, const SlicParams& params) {
  if (params.n_target < 1) throw Error(ErrorCode::InvalidArgument, "n_target must be positive");
  if (!(params.compactness > 0.0)) throw Error(ErrorCode::InvalidArgument, "compactness must be positive");
  if (params.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  const long n_pixels = static_cast<long>(sample.rows()) * sample.cols();
  if (n_pixels < params.n_target) {
    throw Error(ErrorCode::ImageTooSmall, std::to_string(n_pixels) + " pixels for " +
                                              std::to_string(params.n_target) + " superpixels");
  }
  const Grid<Float3> lab = convert_color(sample.pixels, ColorSpace::Lab);
  std::vector<Center> centers = initial_centers(lab, params.n_target);
  const double step = std::sqrt(static_cast<double>(n_pixels) / params.n_target);
  const Grid<int> raw = slic_assign(lab, centers, params.compactness, params.iterations, step);
  return segmentation_from_labels(sample.pixels, enforce_connectivity(raw));
}

SuperpixelSegmentation segmentation_from_labels(const RgbImage& pixels, Grid<int> labels) {
  if (!labels.same_shape(pixels)) throw Error(ErrorCode::ShapeMismatch, "label map and image differ in size");
  SuperpixelSegmentation seg;
  const int n = labels.data.empty() ? 0 : *std::max_element(labels.data.begin(), labels.data.end()) + 1;
  seg.n_nodes = n;
  seg.pixel_count.assign(static_cast<std::size_t>(n), 0);
  seg.is_border.assign(static_cast<std::size_t>(n), false);
  seg.centroids = Matrix::Zero(n, 2);
  for (auto& m : seg.mean_feature) m = Matrix::Zero(n, 3);

  std::array<Grid<Float3>, 3> converted;
  for (const ColorSpace space : kAllColorSpaces) converted[static_cast<std::size_t>(space)] = convert_color(pixels, space);

  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      const int k = labels.at(r, c);
      if (k < 0) throw Error(ErrorCode::InvalidArgument, "negative label");
      ++seg.pixel_count[static_cast<std::size_t>(k)];
      seg.centroids(k, 0) += r;
      seg.centroids(k, 1) += c;
      if (r == 0 || c == 0 || r == labels.rows - 1 || c == labels.cols - 1) seg.is_border[static_cast<std::size_t>(k)] = true;
      for (std::size_t s = 0; s < 3; ++s) {
        const Float3& v = converted[s].at(r, c);
        for (int ch = 0; ch < 3; ++ch) seg.mean_feature[s](k, ch) += v[static_cast<std::size_t>(ch)];
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    const double cnt = seg.pixel_count[static_cast<std::size_t>(k)];
    if (cnt == 0) throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(k) + " is empty");
    seg.centroids.row(k) /= cnt;
    for (auto& m : seg.mean_feature) m.row(k) /= cnt;
  }
  seg.labels = std::move(labels);
  return seg;
}

std::vector<std::vector<int>> node_neighbors(const SuperpixelSegmentation& seg) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(seg.n_nodes));
  const Grid<int>& lab = seg.labels;
  for (int r = 0; r < lab.rows; ++r) {
    for (int c = 0; c < lab.cols; ++c) {
      const int a = lab.at(r, c);
      if (c + 1 < lab.cols && lab.at(r, c + 1) != a) {
        adj[static_cast<std::size_t>(a)].push_back(lab.at(r, c + 1));
        adj[static_cast<std::size_t>(lab.at(r, c + 1))].push_back(a);
      }
      if (r + 1 < lab.rows && lab.at(r + 1, c) != a) {
        adj[static_cast<std::size_t>(a)].push_back(lab.at(r + 1, c));
        adj[static_cast<std::size_t>(lab.at(r + 1, c))].push_back(a);
      }
    }
  }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

Vector node_ground_truth(const SuperpixelSegmentation& seg, const Mask& mask) {
  if (!mask.same_shape(seg.labels)) throw Error(ErrorCode::ShapeMismatch, "mask and segmentation differ in size");
  Vector salient = Vector::Zero(seg.n_nodes);
  for (std::size_t i = 0; i < mask.size(); ++i) salient(seg.labels.data[i]) += mask.data[i] ? 1.0 : 0.0;
  Vector gt(seg.n_nodes);
  for (int k = 0; k < seg.n_nodes; ++k) gt(k) = salient(k) >= 0.5 * seg.pixel_count[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
  return gt;
}

Vector node_means(const SuperpixelSegmentation& seg, const Grid<double>& values) {
  if (!values.same_shape(seg.labels)) throw Error(ErrorCode::ShapeMismatch, "map and segmentation differ in size");
  Vector sum = Vector::Zero(seg.n_nodes);
  for (std::size_t i = 0; i < values.size(); ++i) sum(seg.labels.data[i]) += values.data[i];
  for (int k = 0; k < seg.n_nodes; ++k) sum(k) /= seg.pixel_count[static_cast<std::size_t>(k)];
  return sum;
}

SaliencyMap paint(const SuperpixelSegmentation& seg, const Vector& node_values) {
  if (node_values.size() != seg.n_nodes) throw Error(ErrorCode::ShapeMismatch, "one value per node expected");
  SaliencyMap map(seg.labels.rows, seg.labels.cols);
  for (std::size_t i = 0; i < map.size(); ++i) map.data[i] = node_values(seg.labels.data[i]);
  return map;
}

}  // namespace superdiff
