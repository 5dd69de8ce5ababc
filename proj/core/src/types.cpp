#include "superdiff/types.hpp"

#include <algorithm>
#include <cctype>

namespace superdiff {

std::string to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::Lab: return "Lab";
    case ColorSpace::Rgb: return "RGB";
    case ColorSpace::Hsv: return "HSV";
  }
  return "?";
}

ColorSpace color_space_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lab") return ColorSpace::Lab;
  if (lower == "rgb") return ColorSpace::Rgb;
  if (lower == "hsv") return ColorSpace::Hsv;
  throw Error(ErrorCode::InvalidArgument, "unknown color space '" + name + "'");
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SingularEigenvalue: return "SingularEigenvalue";
    case ErrorCode::EmptySeed: return "EmptySeed";
    case ErrorCode::DegenerateGraph: return "DegenerateGraph";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::FeatureMissing: return "FeatureMissing";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace superdiff
