#include <superdiff/superpixel.hpp>
#include <superdiff_tools/synth.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <queue>
#include <set>

using namespace superdiff;

namespace {

void expect_valid_partition(const SuperpixelSegmentation& seg) {
  const Grid<int>& labels = seg.labels;
  std::vector<int> count(static_cast<std::size_t>(seg.n_nodes), 0);
  for (const int k : labels.data) {
    ASSERT_GE(k, 0);
    ASSERT_LT(k, seg.n_nodes);
    ++count[static_cast<std::size_t>(k)];
  }
  long total = 0;
  for (int k = 0; k < seg.n_nodes; ++k) {
    EXPECT_GT(count[static_cast<std::size_t>(k)], 0);
    EXPECT_EQ(count[static_cast<std::size_t>(k)], seg.pixel_count[static_cast<std::size_t>(k)]);
    total += count[static_cast<std::size_t>(k)];
    EXPECT_GE(seg.centroids(k, 0), 0.0);
    EXPECT_LE(seg.centroids(k, 0), labels.rows - 1.0);
    EXPECT_GE(seg.centroids(k, 1), 0.0);
    EXPECT_LE(seg.centroids(k, 1), labels.cols - 1.0);
  }
  EXPECT_EQ(total, static_cast<long>(labels.rows) * labels.cols);

  // Each label is one 4-connected component.
  Grid<int> seen(labels.rows, labels.cols, 0);
  std::set<int> started;
  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      if (seen.at(r, c)) continue;
      const int k = labels.at(r, c);
      EXPECT_TRUE(started.insert(k).second) << "label " << k << " has two components";
      std::queue<std::pair<int, int>> q;
      q.push({r, c});
      seen.at(r, c) = 1;
      while (!q.empty()) {
        const auto [y, x] = q.front();
        q.pop();
        const int dy[4] = {-1, 1, 0, 0};
        const int dx[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int ny = y + dy[d];
          const int nx = x + dx[d];
          if (ny < 0 || nx < 0 || ny >= labels.rows || nx >= labels.cols) continue;
          if (seen.at(ny, nx) || labels.at(ny, nx) != k) continue;
          seen.at(ny, nx) = 1;
          q.push({ny, nx});
        }
      }
    }
  }
}

// Lloyd iterations on (Lab, scaled position) with the SLIC distance; an independent
// k-means over every pixel with no search window.
std::vector<int> brute_force_kmeans(const RgbImage& img, int k, double compactness, std::vector<std::array<double, 5>> centers) {
  const Grid<Float3> lab = convert_color(img, ColorSpace::Lab);
  const double step = std::sqrt(static_cast<double>(img.size()) / k);
  const double ratio = (compactness / step) * (compactness / step);
  std::vector<int> assign(img.size(), 0);
  for (int it = 0; it < 50; ++it) {
    for (int r = 0; r < img.rows; ++r) {
      for (int c = 0; c < img.cols; ++c) {
        double best = 1e300;
        for (int j = 0; j < k; ++j) {
          const auto& ctr = centers[static_cast<std::size_t>(j)];
          const Float3& p = lab.at(r, c);
          const double dc = (p[0] - ctr[0]) * (p[0] - ctr[0]) + (p[1] - ctr[1]) * (p[1] - ctr[1]) + (p[2] - ctr[2]) * (p[2] - ctr[2]);
          const double ds = (r - ctr[3]) * (r - ctr[3]) + (c - ctr[4]) * (c - ctr[4]);
          const double d = dc + ratio * ds;
          if (d < best) {
            best = d;
            assign[static_cast<std::size_t>(r) * img.cols + c] = j;
          }
        }
      }
    }
    std::vector<std::array<double, 6>> acc(static_cast<std::size_t>(k), {0, 0, 0, 0, 0, 0});
    for (int r = 0; r < img.rows; ++r) {
      for (int c = 0; c < img.cols; ++c) {
        auto& a = acc[static_cast<std::size_t>(assign[static_cast<std::size_t>(r) * img.cols + c])];
        const Float3& p = lab.at(r, c);
        a[0] += p[0];
        a[1] += p[1];
        a[2] += p[2];
        a[3] += r;
        a[4] += c;
        a[5] += 1;
      }
    }
    for (int j = 0; j < k; ++j) {
      const auto& a = acc[static_cast<std::size_t>(j)];
      if (a[5] > 0)
        for (int t = 0; t < 5; ++t) centers[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] = a[static_cast<std::size_t>(t)] / a[5];
    }
  }
  return assign;
}

ImageSample synth_sample(int rows, int cols, int index = 0) {
  tools::SynthParams p;
  p.rows = rows;
  p.cols = cols;
  const auto img = tools::synth_image(p, index);
  return {"synth", img.pixels, img.mask, {}};
}

}  // namespace

TEST(Superpixel, UniformImageGivesRegularGrid) {
  const ImageSample s{"gray", RgbImage(100, 100, Rgb{128, 128, 128}), std::nullopt, {}};
  SlicParams p;
  p.n_target = 100;
  const auto seg = segment(s, p);
  expect_valid_partition(seg);
  EXPECT_EQ(seg.n_nodes, 100);
  for (const int cnt : seg.pixel_count) EXPECT_NEAR(cnt, 100, 30);
}

TEST(Superpixel, TwoToneImageMatchesBruteForceKMeans) {
  RgbImage img(16, 24);
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) img.at(r, c) = c < 12 ? Rgb{220, 30, 30} : Rgb{30, 30, 220};
  SlicParams p;
  p.n_target = 2;
  const auto seg = segment({"two", img, std::nullopt, {}}, p);
  ASSERT_EQ(seg.n_nodes, 2);

  const Grid<Float3> lab = convert_color(img, ColorSpace::Lab);
  std::vector<std::array<double, 5>> init{{lab.at(3, 3)[0], lab.at(3, 3)[1], lab.at(3, 3)[2], 3.0, 3.0},
                                          {lab.at(12, 20)[0], lab.at(12, 20)[1], lab.at(12, 20)[2], 12.0, 20.0}};
  const auto oracle = brute_force_kmeans(img, 2, p.compactness, init);
  // Same partition up to relabeling.
  std::map<int, int> mapping;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const auto [it, inserted] = mapping.emplace(seg.labels.data[i], oracle[i]);
    EXPECT_EQ(it->second, oracle[i]);
  }
  for (int r = 0; r < img.rows; ++r) {
    EXPECT_EQ(seg.labels.at(r, 0), 0);
    EXPECT_EQ(seg.labels.at(r, 23), 1);
    EXPECT_EQ(seg.labels.at(r, 11), 0);
    EXPECT_EQ(seg.labels.at(r, 12), 1);
  }
}

TEST(Superpixel, TooSmallImage) {
  const ImageSample s{"tiny", RgbImage(2, 2, Rgb{0, 0, 0}), std::nullopt, {}};
  try {
    segment(s, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(Superpixel, InvalidParameters) {
  const ImageSample s{"img", RgbImage(20, 20, Rgb{0, 0, 0}), std::nullopt, {}};
  SlicParams p;
  p.compactness = 0.0;
  EXPECT_THROW(segment(s, p), Error);
  p = {};
  p.n_target = 0;
  EXPECT_THROW(segment(s, p), Error);
}

TEST(Superpixel, SynthImageInvariants) {
  for (int i = 0; i < 3; ++i) {
    const auto seg = segment(synth_sample(90, 120, i));
    expect_valid_partition(seg);
    EXPECT_GT(seg.n_nodes, 100);
    EXPECT_LT(seg.n_nodes, 300);
  }
}

TEST(Superpixel, LabelsInRasterOrderOfFirstAppearance) {
  const auto seg = segment(synth_sample(90, 120, 1));
  int next = 0;
  for (const int k : seg.labels.data) {
    ASSERT_LE(k, next);
    if (k == next) ++next;
  }
  EXPECT_EQ(next, seg.n_nodes);
}

TEST(Superpixel, MeanFeaturesMatchBruteForce) {
  const ImageSample s = synth_sample(40, 50, 2);
  SlicParams p;
  p.n_target = 30;
  const auto seg = segment(s, p);
  for (const ColorSpace space : kAllColorSpaces) {
    const Grid<Float3> conv = convert_color(s.pixels, space);
    for (int k = 0; k < seg.n_nodes; ++k) {
      Float3 sum{0, 0, 0};
      int n = 0;
      for (std::size_t i = 0; i < conv.size(); ++i) {
        if (seg.labels.data[i] != k) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) sum[ch] += conv.data[i][ch];
        ++n;
      }
      for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(seg.features(space)(k, ch), sum[static_cast<std::size_t>(ch)] / n, 1e-9);
    }
  }
}

TEST(Superpixel, Deterministic) {
  const ImageSample s = synth_sample(60, 80, 4);
  const auto a = segment(s);
  const auto b = segment(s);
  EXPECT_EQ(a.labels.data, b.labels.data);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(Superpixel, BorderFlagsAndHelpers) {
  const RgbImage img(9, 9, Rgb{10, 10, 10});
  const auto seg = segmentation_from_labels(img, fixtures::block_labels(9, 9, 3));
  ASSERT_EQ(seg.n_nodes, 9);
  for (int k = 0; k < 9; ++k) EXPECT_EQ(seg.is_border[static_cast<std::size_t>(k)], k != 4);
  const auto adj = node_neighbors(seg);
  EXPECT_EQ(adj[4], (std::vector<int>{1, 3, 5, 7}));
  EXPECT_EQ(adj[0], (std::vector<int>{1, 3}));

  Mask m(9, 9, 0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.at(r, c) = (r * 3 + c) < 5;  // 5 of 9 pixels in node 0
  m.at(3, 3) = 1;                                             // 1 of 9 pixels in node 4
  const Vector gt = node_ground_truth(seg, m);
  EXPECT_EQ(gt(0), 1.0);
  EXPECT_EQ(gt(4), 0.0);

  Vector v(9);
  for (int k = 0; k < 9; ++k) v(k) = k;
  const SaliencyMap painted = paint(seg, v);
  EXPECT_EQ(painted.at(8, 8), 8.0);
  EXPECT_EQ(node_means(seg, painted), v);
}
