#include "superdiff_tools/synth.hpp"

#include <superdiff/ingest.hpp>
#include <superdiff/parallel.hpp>

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace superdiff::tools {

namespace {

using Color = cv::Vec3d;

double rgb_distance(const Color& a, const Color& b) { return cv::norm(a - b); }

Color random_color(std::mt19937_64& rng, double lo = 30.0, double hi = 225.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Color jitter(std::mt19937_64& rng, const Color& c, double amount) {
  std::uniform_real_distribution<double> u(-amount, amount);
  Color out;
  for (int k = 0; k < 3; ++k) out[k] = std::clamp(c[k] + u(rng), 0.0, 255.0);
  return out;
}

void fill_ellipse(cv::Mat& canvas, cv::Mat& mask, cv::Point2d center, cv::Size2d axes, double angle,
                  const Color& color) {
  const cv::RotatedRect box(center, cv::Size2f(static_cast<float>(2 * axes.width), static_cast<float>(2 * axes.height)),
                            static_cast<float>(angle));
  cv::ellipse(canvas, box, cv::Scalar(color[0], color[1], color[2]), cv::FILLED, cv::LINE_8);
  if (!mask.empty()) cv::ellipse(mask, box, cv::Scalar(255), cv::FILLED, cv::LINE_8);
}

Grid<std::uint8_t> to_grid(const cv::Mat& m) {
  Grid<std::uint8_t> g(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) g.at(r, c) = m.at<std::uint8_t>(r, c);
  return g;
}

}  // namespace

SynthImage synth_image(const SynthParams& params, int index) {
  std::mt19937_64 rng(params.seed * 1000003ULL + static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int rows = params.rows;
  const int cols = params.cols;

  // Background: two-color linear gradient plus clutter blobs near the background palette.
  const Color c1 = random_color(rng);
  const Color c2 = jitter(rng, c1, 70.0);
  const double theta = u01(rng) * 2.0 * M_PI;
  cv::Mat canvas(rows, cols, CV_64FC3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double t = 0.5 + 0.5 * ((c / (cols - 1.0) - 0.5) * std::cos(theta) + (r / (rows - 1.0) - 0.5) * std::sin(theta));
      canvas.at<Color>(r, c) = c1 * (1.0 - t) + c2 * t;
    }
  }
  cv::Mat none;
  const int n_clutter = 3 + static_cast<int>(u01(rng) * 4);
  for (int k = 0; k < n_clutter; ++k) {
    const cv::Point2d center(u01(rng) * cols, u01(rng) * rows);
    const cv::Size2d axes((0.05 + 0.12 * u01(rng)) * cols, (0.05 + 0.12 * u01(rng)) * rows);
    fill_ellipse(canvas, none, center, axes, u01(rng) * 180.0, jitter(rng, u01(rng) < 0.5 ? c1 : c2, 60.0));
  }

  // Object: one or two overlapping ellipses near the center, with a second tone inside.
  Color object_color = random_color(rng);
  for (int attempt = 0; attempt < 50 && std::min(rgb_distance(object_color, c1), rgb_distance(object_color, c2)) < 90.0;
       ++attempt) {
    object_color = random_color(rng);
  }
  cv::Mat mask = cv::Mat::zeros(rows, cols, CV_8U);
  const cv::Point2d center(cols * (0.5 + 0.12 * gauss(rng)), rows * (0.5 + 0.12 * gauss(rng)));
  const cv::Point2d clamped(std::clamp(center.x, 0.3 * cols, 0.7 * cols), std::clamp(center.y, 0.3 * rows, 0.7 * rows));
  const cv::Size2d axes((0.12 + 0.14 * u01(rng)) * cols, (0.12 + 0.14 * u01(rng)) * rows);
  const double angle = u01(rng) * 180.0;
  fill_ellipse(canvas, mask, clamped, axes, angle, object_color);
  if (u01(rng) < 0.5) {
    const cv::Point2d offset(clamped.x + axes.width * (u01(rng) - 0.5), clamped.y + axes.height * (u01(rng) - 0.5));
    fill_ellipse(canvas, mask, offset, cv::Size2d(axes.width * 0.6, axes.height * 0.6), u01(rng) * 180.0, object_color);
  }
  fill_ellipse(canvas, none, clamped, cv::Size2d(axes.width * 0.45, axes.height * 0.45), angle,
               jitter(rng, object_color, 45.0));

  SynthImage out;
  out.pixels = RgbImage(rows, cols);
  out.mask = Mask(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Color& v = canvas.at<Color>(r, c);
      Rgb px;
      for (int k = 0; k < 3; ++k) px[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::clamp(std::lround(v[k] + 6.0 * gauss(rng)), 0L, 255L));
      out.pixels.at(r, c) = px;
      out.mask.at(r, c) = mask.at<std::uint8_t>(r, c) ? 1 : 0;
    }
  }

  out.seedmap = noisy_seedmap(out.mask, params.blur_sigma, params.salt_fraction, rng());
  return out;
}

Grid<std::uint8_t> noisy_seedmap(const Mask& mask, double blur_sigma, double salt_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  cv::Mat m(mask.rows, mask.cols, CV_8U);
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c) m.at<std::uint8_t>(r, c) = mask.at(r, c) ? 255 : 0;
  cv::Mat blurred;
  cv::GaussianBlur(m, blurred, cv::Size(0, 0), blur_sigma);
  for (int r = 0; r < mask.rows; ++r)
    for (int c = 0; c < mask.cols; ++c)
      if (u01(rng) < salt_fraction) blurred.at<std::uint8_t>(r, c) = 255;
  return to_grid(blurred);
}

std::vector<std::string> contrast_feature_names() {
  return {"global_contrast", "border_contrast", "center_prior", "local_contrast"};
}

Matrix contrast_features(const SuperpixelSegmentation& seg) {
  const int n = seg.n_nodes;
  const Matrix& lab = seg.features(ColorSpace::Lab);
  const double h = std::max(1, seg.labels.rows - 1);
  const double w = std::max(1, seg.labels.cols - 1);
  Matrix f = Matrix::Zero(n, 4);
  for (int i = 0; i < n; ++i) {
    double global = 0.0;
    double global_w = 0.0;
    double border = 0.0;
    int n_border = 0;
    double local = 0.0;
    double local_w = 0.0;
    const double yi = seg.centroids(i, 0) / h;
    const double xi = seg.centroids(i, 1) / w;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (lab.row(i) - lab.row(j)).norm();
      const double size = seg.pixel_count[static_cast<std::size_t>(j)];
      global += size * d;
      global_w += size;
      if (seg.is_border[static_cast<std::size_t>(j)]) {
        border += d;
        ++n_border;
      }
      const double dy = yi - seg.centroids(j, 0) / h;
      const double dx = xi - seg.centroids(j, 1) / w;
      const double ws = size * std::exp(-(dx * dx + dy * dy) / (2.0 * 0.25 * 0.25));
      local += ws * d;
      local_w += ws;
    }
    const double cy = 2.0 * yi - 1.0;
    const double cx = 2.0 * xi - 1.0;
    f(i, 0) = global_w > 0 ? global / global_w : 0.0;
    f(i, 1) = n_border > 0 ? border / n_border : 0.0;
    f(i, 2) = std::exp(-(cx * cx + cy * cy) / (2.0 * 0.5));
    f(i, 3) = local_w > 0 ? local / local_w : 0.0;
  }
  return f;
}

void write_synth_dataset(const std::filesystem::path& root, const SynthParams& params, int jobs) {
  for (const char* sub : {"images", "masks", "features"}) std::filesystem::create_directories(root / sub);
  std::filesystem::create_directories(root / "seedmaps" / params.seedmap_method);
  parallel_for(static_cast<std::size_t>(params.n_images), jobs, [&](std::size_t i) {
    const SynthImage img = synth_image(params, static_cast<int>(i));
    char id[32];
    std::snprintf(id, sizeof id, "img_%04zu", i);
    const std::string name = std::string(id) + ".png";
    write_rgb_png(root / "images" / name, img.pixels);
    write_mask_png(root / "masks" / name, img.mask);
    write_gray_png(root / "seedmaps" / params.seedmap_method / name, img.seedmap);
    ImageSample sample{id, img.pixels, std::nullopt, {}};
    const SuperpixelSegmentation seg = segment(sample, params.slic);
    write_feature_csv(root / "features" / (std::string(id) + ".csv"), contrast_features(seg), contrast_feature_names());
  });
}

}  // namespace superdiff::tools
