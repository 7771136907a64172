#include "subgrad/image.hpp"

#include <utility>

#include "subgrad/error.hpp"

namespace subgrad {

GrayImage::GrayImage(Matrix px, double peak_value) : pixels(std::move(px)), peak(peak_value) {
  if (pixels.rows() < 2 || pixels.cols() < 2) throw InvalidArgument("image must be at least 2x2");
  if (!(peak > 0.0)) throw InvalidArgument("image peak must be positive");
  if (!pixels.allFinite()) throw NumericError("image has non-finite pixels");
}

}  // namespace subgrad
