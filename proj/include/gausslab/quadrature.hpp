#pragma once

// Expectations over the Gaussian N(0, diag(lambdas)) restricted to a handful
// of active modes. Integrands return a vector of K values per draw so that
// several related quantities share their random numbers; the estimate keeps
// the K x K covariance of the mean for paired comparisons.

#include <cstdint>
#include <functional>
#include <variant>

#include "gausslab/types.hpp"

namespace gausslab {

struct MonteCarlo {
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

/// Tensor Gauss-Hermite rule on the leading retained modes, Monte Carlo over
/// the remaining ones. The rule error is estimated by the difference with the
/// (nodes - 1)-point rule.
struct GaussHermite {
  std::size_t nodes = 12;
  std::size_t retained_modes = 6;
  std::size_t remainder_samples = 1024;
  std::uint64_t seed = 1;
};

using QuadratureSpec = std::variant<MonteCarlo, GaussHermite>;

inline constexpr std::size_t kMaxHermiteNodes = 20;
inline constexpr std::size_t kMaxRetainedModes = 6;

void validate(const QuadratureSpec& q);

/// Same rule with a different random stream (identity for pure GH rules).
QuadratureSpec reseeded(const QuadratureSpec& q, std::uint64_t stream);

struct MultiEstimate {
  Vector mean;
  Matrix cov;  // covariance of the estimator of `mean`

  Estimate component(Eigen::Index i) const;
  /// Estimate of c . mean with its standard error.
  Estimate combine(const Vector& c) const;
};

using Integrand = std::function<void(ConstVectorRef y, VectorRef out)>;

/// E[h(y)] for y ~ N(0, diag(lambdas)), h with `width` outputs.
MultiEstimate gaussian_expectation(const Vector& lambdas, std::size_t width, const Integrand& h,
                                   const QuadratureSpec& q);

/// Probabilists' Gauss-Hermite nodes and weights (weights sum to 1).
void hermite_rule(std::size_t nodes, Vector& points, Vector& weights);

/// Gauss-Legendre nodes and weights on [0, 1].
void legendre_rule(std::size_t nodes, Vector& points, Vector& weights);

/// Mean and covariance of the mean of the columns of `values` (K x m).
MultiEstimate sample_mean(const Matrix& values);

}  // namespace gausslab
