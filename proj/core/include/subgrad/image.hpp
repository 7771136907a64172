#pragma once

#include "subgrad/types.hpp"

namespace subgrad {

/// Grayscale image stored row-major as reals. `peak` is the nominal white
/// level (255 for 8-bit data, 1 for normalized data). Pixel values may leave
/// [0, peak] during optimization; clipping happens only when writing files.
struct GrayImage {
  Matrix pixels;
  double peak = 255.0;

  GrayImage() = default;
  GrayImage(Matrix px, double peak_value);

  Eigen::Index rows() const noexcept { return pixels.rows(); }
  Eigen::Index cols() const noexcept { return pixels.cols(); }
  bool same_shape(const GrayImage& other) const noexcept {
    return rows() == other.rows() && cols() == other.cols();
  }
};

}  // namespace subgrad
