#pragma once

#include <Eigen/Dense>

namespace gausslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;
using MatrixRef = Eigen::Ref<Matrix>;

/// A scalar estimate with its standard error (Monte Carlo) or quadrature
/// error bound (deterministic rules). `std_error == 0` means exact.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

}  // namespace gausslab
