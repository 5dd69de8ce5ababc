#pragma once

#include "superdiff/refine.hpp"
#include "superdiff/superpixel.hpp"
#include "superdiff/types.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace superdiff {

struct GaussianCenter {
  double variance;
};
struct AbsorbedTime {};
struct External {
  std::string name;
};
using SeedKind = std::variant<GaussianCenter, AbsorbedTime, External>;

std::string describe(const SeedKind& kind);

struct SeedVector {
  Vector values;  // nonnegative, max > 0
  SeedKind kind;
};

/// s_i = exp(-|c_i|^2 / (2 variance)) with the centroid c_i mapped to [-1,1]^2 and the
/// image center at the origin.
SeedVector gaussian_seed(const SuperpixelSegmentation& seg, double variance);

/// Unnormalized absorbed time e = A_bar^-1 z, z the non-border indicator.
Vector absorbed_time_raw(const LowRankDiffusion& op, const std::vector<bool>& is_border);

/// Absorbed time min-max rescaled to [0,1]. Throws DegenerateGraph when every node is
/// a border node or none is.
SeedVector absorbed_time_seed(const LowRankDiffusion& op, const std::vector<bool>& is_border);

/// Node means of an 8-bit saliency map, rescaled to [0,1]. Throws ShapeMismatch.
SeedVector external_seed(const Grid<std::uint8_t>& map, const SuperpixelSegmentation& seg,
                         std::string name = "external");
SeedVector external_seed(const std::filesystem::path& map_path, const SuperpixelSegmentation& seg);

/// Min-max rescale to [0,1]. A constant positive vector maps to ones; throws EmptySeed
/// when the vector has no positive entry.
Vector rescale_seed(const Vector& values);

}  // namespace superdiff
