#pragma once

#include <superdiff/superpixel.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace superdiff::tools {

struct SynthParams {
  int n_images = 200;
  int rows = 150;
  int cols = 200;
  std::uint64_t seed = 7;
  /// Seed-map degradation: Gaussian blur of the mask, then salt noise on this fraction of pixels.
  double blur_sigma = 10.0;
  double salt_fraction = 0.2;
  std::string seedmap_method = "noisy";
  SlicParams slic;
};

/// One single-object image with clutter, its mask and a degraded seed map.
struct SynthImage {
  RgbImage pixels;
  Mask mask;
  Grid<std::uint8_t> seedmap;
};

SynthImage synth_image(const SynthParams& params, int index);

/// Ground truth blurred by a Gaussian of `blur_sigma` pixels, then `salt_fraction` of the
/// pixels set to 255.
Grid<std::uint8_t> noisy_seedmap(const Mask& mask, double blur_sigma, double salt_fraction, std::uint64_t seed);

/// Contrast and position cues per superpixel, computed from the image alone.
Matrix contrast_features(const SuperpixelSegmentation& seg);
std::vector<std::string> contrast_feature_names();

/// Writes images/, masks/, features/ and seedmaps/<method>/ under root.
void write_synth_dataset(const std::filesystem::path& root, const SynthParams& params, int jobs = 1);

}  // namespace superdiff::tools
