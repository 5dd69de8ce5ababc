#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace superdiff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row-major 2-D array. Used for images, masks, label maps and saliency maps.
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const T& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(int r, int c) const { return rows == r && cols == c; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const { return rows == other.rows && cols == other.cols; }
};

using Rgb = std::array<std::uint8_t, 3>;
using Float3 = std::array<double, 3>;
using RgbImage = Grid<Rgb>;
using Mask = Grid<std::uint8_t>;  // values in {0,1}
using SaliencyMap = Grid<double>;  // values in [0,1]

enum class ColorSpace { Lab, Rgb, Hsv };
inline constexpr std::array<ColorSpace, 3> kAllColorSpaces{ColorSpace::Lab, ColorSpace::Rgb,
                                                           ColorSpace::Hsv};

std::string to_string(ColorSpace space);
ColorSpace color_space_from_string(const std::string& name);

enum class ErrorCode {
  InvalidArgument,
  DecodeError,
  ShapeMismatch,
  ParseError,
  ImageTooSmall,
  NumericalFailure,
  SingularEigenvalue,
  EmptySeed,
  DegenerateGraph,
  InsufficientData,
  LayoutMismatch,
  EmptyGroundTruth,
  EmptyForeground,
  FeatureMissing,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace superdiff
