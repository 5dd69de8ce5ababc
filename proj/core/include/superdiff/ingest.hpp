#pragma once

#include "superdiff/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace superdiff {

struct SuperpixelSegmentation;

struct ImageSample {
  std::string id;
  RgbImage pixels;
  std::optional<Mask> gt_mask;
  std::string source_path;

  int rows() const { return pixels.rows; }
  int cols() const { return pixels.cols; }
};

/// Per-node external saliency features, one column per feature, rescaled to [0,1].
struct FeatureBank {
  Matrix node_features;  // N x Z
  std::vector<std::string> names;
};

/// Decodes an 8-bit image (and optional mask, binarized at >= 128).
/// Throws DecodeError on unreadable files and ShapeMismatch when mask and image differ in size.
ImageSample load_sample(const std::filesystem::path& image_path,
                        const std::optional<std::filesystem::path>& mask_path = std::nullopt);

/// Binarizes an 8-bit single-channel map at >= 128.
Mask binarize_mask(const Grid<std::uint8_t>& gray);

Grid<std::uint8_t> read_gray(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const Grid<std::uint8_t>& gray);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
/// Writes a {0,1} mask as a {0,255} PNG.
void write_mask_png(const std::filesystem::path& path, const Mask& mask);
void write_label_png16(const std::filesystem::path& path, const Grid<int>& labels);

// Pixel-level conversions. Lab uses the D65 white point.
Float3 srgb_to_lab(const Rgb& rgb);
/// H in [0,360), S and V in [0,1].
Float3 srgb_to_hsv(const Rgb& rgb);

/// Converts a whole image. RGB is passed through on [0,255]; HSV channels are rescaled
/// to [0,255] so Euclidean distances are comparable across spaces.
Grid<Float3> convert_color(const RgbImage& pixels, ColorSpace space);

/// Parses the feature CSV (header of names, then one row per node) and min-max rescales
/// every column; constant columns become 0.5.
FeatureBank load_feature_bank(const std::filesystem::path& path, std::size_t n_nodes);
FeatureBank load_feature_bank(const std::filesystem::path& path, const SuperpixelSegmentation& seg);
FeatureBank parse_feature_csv(const std::string& text, std::size_t n_nodes);
void write_feature_csv(const std::filesystem::path& path, const Matrix& features,
                       const std::vector<std::string>& names);

/// `<root>/images/<id>.(jpg|png)`, `<root>/masks/<id>.png`, optional
/// `<root>/features/<id>.csv` and `<root>/seedmaps/<method>/<id>.png`.
struct DatasetEntry {
  std::string id;
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  std::optional<std::filesystem::path> feature_path;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<DatasetEntry> entries;  // sorted by id

  std::filesystem::path seedmap_path(const std::string& method, const std::string& id) const;
};

DatasetIndex index_dataset(const std::filesystem::path& root);

/// Sorted-id parity split: even positions train, odd positions test.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
DatasetSplit split_by_parity(const DatasetIndex& index);

}  // namespace superdiff
