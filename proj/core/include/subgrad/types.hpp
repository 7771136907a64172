#pragma once

#include <Eigen/Core>

namespace subgrad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model parameters w. Length is fixed for the lifetime of a run.
using Iterate = Vector;

/// One streaming observation: feature/regression vector h and its label or
/// target gamma (+1/-1 for classification, real-valued for regression).
struct Sample {
  Vector h;
  double gamma = 0.0;
};

}  // namespace subgrad
