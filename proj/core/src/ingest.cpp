#include "superdiff/ingest.hpp"

#include "superdiff/superpixel.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace superdiff {
namespace fs = std::filesystem;

namespace {

cv::Mat imread_checked(const fs::path& path, int flags) {
  if (!fs::exists(path)) throw Error(ErrorCode::DecodeError, "no such file: " + path.string());
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw Error(ErrorCode::DecodeError, "cannot decode " + path.string());
  return m;
}

RgbImage from_bgr(const cv::Mat& bgr) {
  RgbImage img(bgr.rows, bgr.cols);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c) img.at(r, c) = {row[c][2], row[c][1], row[c][0]};
  }
  return img;
}

Grid<std::uint8_t> from_gray(const cv::Mat& gray) {
  Grid<std::uint8_t> g(gray.rows, gray.cols);
  for (int r = 0; r < gray.rows; ++r) {
    const auto* row = gray.ptr<std::uint8_t>(r);
    std::copy(row, row + gray.cols, g.data.begin() + static_cast<std::ptrdiff_t>(r) * gray.cols);
  }
  return g;
}

void imwrite_checked(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

double srgb_to_linear(std::uint8_t v) {
  const double c = v / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Mask binarize_mask(const Grid<std::uint8_t>& gray) {
  Mask m(gray.rows, gray.cols);
  for (std::size_t i = 0; i < gray.size(); ++i) m.data[i] = gray.data[i] >= 128 ? 1 : 0;
  return m;
}

ImageSample load_sample(const fs::path& image_path, const std::optional<fs::path>& mask_path) {
  ImageSample sample;
  sample.id = image_path.stem().string();
  sample.source_path = image_path.string();
  sample.pixels = from_bgr(imread_checked(image_path, cv::IMREAD_COLOR));
  if (mask_path) {
    const Grid<std::uint8_t> gray = read_gray(*mask_path);
    if (!gray.same_shape(sample.pixels)) {
      throw Error(ErrorCode::ShapeMismatch,
                  "mask " + std::to_string(gray.rows) + "x" + std::to_string(gray.cols) +
                      " vs image " + std::to_string(sample.rows()) + "x" + std::to_string(sample.cols()));
    }
    sample.gt_mask = binarize_mask(gray);
  }
  return sample;
}

Grid<std::uint8_t> read_gray(const fs::path& path) {
  return from_gray(imread_checked(path, cv::IMREAD_GRAYSCALE));
}

void write_gray_png(const fs::path& path, const Grid<std::uint8_t>& gray) {
  cv::Mat m(gray.rows, gray.cols, CV_8UC1);
  std::copy(gray.data.begin(), gray.data.end(), m.ptr<std::uint8_t>(0));
  imwrite_checked(path, m);
}

void write_rgb_png(const fs::path& path, const RgbImage& image) {
  cv::Mat m(image.rows, image.cols, CV_8UC3);
  for (int r = 0; r < image.rows; ++r) {
    auto* row = m.ptr<cv::Vec3b>(r);
    for (int c = 0; c < image.cols; ++c) {
      const Rgb& p = image.at(r, c);
      row[c] = cv::Vec3b(p[2], p[1], p[0]);
    }
  }
  imwrite_checked(path, m);
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  Grid<std::uint8_t> g(mask.rows, mask.cols);
  for (std::size_t i = 0; i < mask.size(); ++i) g.data[i] = mask.data[i] ? 255 : 0;
  write_gray_png(path, g);
}

void write_label_png16(const fs::path& path, const Grid<int>& labels) {
  cv::Mat m(labels.rows, labels.cols, CV_16UC1);
  for (int r = 0; r < labels.rows; ++r) {
    auto* row = m.ptr<std::uint16_t>(r);
    for (int c = 0; c < labels.cols; ++c) row[c] = static_cast<std::uint16_t>(labels.at(r, c));
  }
  imwrite_checked(path, m);
}

Float3 srgb_to_lab(const Rgb& rgb) {
  const double r = srgb_to_linear(rgb[0]);
  const double g = srgb_to_linear(rgb[1]);
  const double b = srgb_to_linear(rgb[2]);
  // D65 reference white taken as the row sums so that sRGB white maps to a = b = 0.
  constexpr double xn = 0.4124564 + 0.3575761 + 0.1804375;
  constexpr double yn = 0.2126729 + 0.7151522 + 0.0721750;
  constexpr double zn = 0.0193339 + 0.1191920 + 0.9503041;
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / xn;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / yn;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / zn;
  const double fx = lab_f(x);
  const double fy = lab_f(y);
  const double fz = lab_f(z);
  return {116.0 * fy - 16.0, std::clamp(500.0 * (fx - fy), -128.0, 127.0),
          std::clamp(200.0 * (fy - fz), -128.0, 127.0)};
}

Float3 srgb_to_hsv(const Rgb& rgb) {
  const double r = rgb[0] / 255.0;
  const double g = rgb[1] / 255.0;
  const double b = rgb[2] / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  double h = 0.0;
  if (delta > 0.0) {
    if (mx == r) {
      h = 60.0 * std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
      h = 60.0 * ((b - r) / delta + 2.0);
    } else {
      h = 60.0 * ((r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
  }
  const double s = mx > 0.0 ? delta / mx : 0.0;
  return {h, s, mx};
}

Grid<Float3> convert_color(const RgbImage& pixels, ColorSpace space) {
  Grid<Float3> out(pixels.rows, pixels.cols);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const Rgb& p = pixels.data[i];
    switch (space) {
      case ColorSpace::Lab:
        out.data[i] = srgb_to_lab(p);
        break;
      case ColorSpace::Rgb:
        out.data[i] = {static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2])};
        break;
      case ColorSpace::Hsv: {
        const Float3 hsv = srgb_to_hsv(p);
        out.data[i] = {hsv[0] * 255.0 / 360.0, hsv[1] * 255.0, hsv[2] * 255.0};
        break;
      }
    }
  }
  return out;
}

FeatureBank parse_feature_csv(const std::string& text, std::size_t n_nodes) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) {
      names = split_csv_line(line);
      break;
    }
  }
  if (names.empty()) throw Error(ErrorCode::ParseError, "feature CSV has no header");
  const std::size_t z = names.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != z) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(rows.size() + 1) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(z));
    }
    std::vector<double> row(z);
    for (std::size_t k = 0; k < z; ++k) {
      const std::string& f = fields[k];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[k])) {
        throw Error(ErrorCode::ParseError, "bad number '" + f + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != n_nodes) {
    throw Error(ErrorCode::ShapeMismatch, "feature CSV has " + std::to_string(rows.size()) +
                                              " rows, segmentation has " + std::to_string(n_nodes));
  }

  FeatureBank bank;
  bank.names = std::move(names);
  bank.node_features.resize(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(z));
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t k = 0; k < z; ++k) bank.node_features(i, k) = rows[i][k];
  for (Eigen::Index k = 0; k < bank.node_features.cols(); ++k) {
    auto col = bank.node_features.col(k);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo) {
      col = (col.array() - lo) / (hi - lo);
    } else {
      col.setConstant(0.5);
    }
  }
  return bank;
}

FeatureBank load_feature_bank(const fs::path& path, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_feature_csv(buffer.str(), n_nodes);
}

FeatureBank load_feature_bank(const fs::path& path, const SuperpixelSegmentation& seg) {
  return load_feature_bank(path, static_cast<std::size_t>(seg.n_nodes));
}

void write_feature_csv(const fs::path& path, const Matrix& features,
                       const std::vector<std::string>& names) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index k = 0; k < features.cols(); ++k) out << (k ? "," : "") << features(i, k);
    out << '\n';
  }
}

fs::path DatasetIndex::seedmap_path(const std::string& method, const std::string& id) const {
  return root / "seedmaps" / method / (id + ".png");
}

DatasetIndex index_dataset(const fs::path& root) {
  const fs::path images = root / "images";
  if (!fs::is_directory(images)) throw Error(ErrorCode::IoError, "missing directory " + images.string());
  DatasetIndex index;
  index.root = root;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".jpg" && ext != ".jpeg" && ext != ".png") continue;
    DatasetEntry e;
    e.id = entry.path().stem().string();
    e.image_path = entry.path();
    if (const fs::path m = root / "masks" / (e.id + ".png"); fs::exists(m)) e.mask_path = m;
    if (const fs::path f = root / "features" / (e.id + ".csv"); fs::exists(f)) e.feature_path = f;
    index.entries.push_back(std::move(e));
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
  return index;
}

DatasetSplit split_by_parity(const DatasetIndex& index) {
  DatasetSplit split;
  for (std::size_t i = 0; i < index.entries.size(); ++i) (i % 2 == 0 ? split.train : split.test).push_back(i);
  return split;
}

}  // namespace superdiff
