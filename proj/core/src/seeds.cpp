#include "superdiff/seeds.hpp"

#include "superdiff/ingest.hpp"

#include <cmath>
#include <sstream>

namespace superdiff {

std::string describe(const SeedKind& kind) {
  struct Visitor {
    std::string operator()(const GaussianCenter& g) const {
      std::ostringstream os;
      os << "gaussian(" << g.variance << ")";
      return os.str();
    }
    std::string operator()(const AbsorbedTime&) const { return "absorbed_time"; }
    std::string operator()(const External& e) const { return "external(" + e.name + ")"; }
  };
  return std::visit(Visitor{}, kind);
}

SeedVector gaussian_seed(const SuperpixelSegmentation& seg, double variance) {
  if (!(variance > 0.0)) throw Error(ErrorCode::InvalidArgument, "variance must be positive");
  const double half_h = std::max(1.0, (seg.labels.rows - 1) / 2.0);
  const double half_w = std::max(1.0, (seg.labels.cols - 1) / 2.0);
  SeedVector seed{Vector(seg.n_nodes), GaussianCenter{variance}};
  for (int i = 0; i < seg.n_nodes; ++i) {
    const double y = (seg.centroids(i, 0) - (seg.labels.rows - 1) / 2.0) / half_h;
    const double x = (seg.centroids(i, 1) - (seg.labels.cols - 1) / 2.0) / half_w;
    seed.values(i) = std::exp(-(x * x + y * y) / (2.0 * variance));
  }
  return seed;
}

Vector rescale_seed(const Vector& values) {
  if (values.size() == 0) throw Error(ErrorCode::EmptySeed, "empty seed");
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (hi > lo) return (values.array() - lo) / (hi - lo);
  if (hi > 0.0) return Vector::Ones(values.size());
  throw Error(ErrorCode::EmptySeed, "seed has no positive entry");
}

Vector absorbed_time_raw(const LowRankDiffusion& op, const std::vector<bool>& is_border) {
  if (static_cast<int>(is_border.size()) != op.n()) throw Error(ErrorCode::ShapeMismatch, "border flags per node expected");
  Vector z(op.n());
  int interior = 0;
  for (int i = 0; i < op.n(); ++i) {
    z(i) = is_border[static_cast<std::size_t>(i)] ? 0.0 : 1.0;
    interior += is_border[static_cast<std::size_t>(i)] ? 0 : 1;
  }
  if (interior == 0) throw Error(ErrorCode::DegenerateGraph, "every node is a border node");
  if (interior == op.n()) throw Error(ErrorCode::DegenerateGraph, "no border node");
  return op.apply(z);
}

SeedVector absorbed_time_seed(const LowRankDiffusion& op, const std::vector<bool>& is_border) {
  const Vector raw = absorbed_time_raw(op, is_border);
  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  Vector values = hi > lo ? Vector((raw.array() - lo) / (hi - lo)) : Vector::Constant(raw.size(), 0.5);
  return {std::move(values), AbsorbedTime{}};
}

SeedVector external_seed(const Grid<std::uint8_t>& map, const SuperpixelSegmentation& seg, std::string name) {
  if (!map.same_shape(seg.labels)) {
    throw Error(ErrorCode::ShapeMismatch, "seed map " + std::to_string(map.rows) + "x" + std::to_string(map.cols) +
                                              " vs image " + std::to_string(seg.labels.rows) + "x" +
                                              std::to_string(seg.labels.cols));
  }
  Vector sum = Vector::Zero(seg.n_nodes);
  for (std::size_t i = 0; i < map.size(); ++i) sum(seg.labels.data[i]) += map.data[i] / 255.0;
  for (int k = 0; k < seg.n_nodes; ++k) sum(k) /= seg.pixel_count[static_cast<std::size_t>(k)];
  return {rescale_seed(sum), External{std::move(name)}};
}

SeedVector external_seed(const std::filesystem::path& map_path, const SuperpixelSegmentation& seg) {
  return external_seed(read_gray(map_path), seg, map_path.parent_path().filename().string());
}

}  // namespace superdiff
