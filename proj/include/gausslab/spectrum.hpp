#pragma once

// Diagonal (eigenbasis) representation of the covariance operator Q of the
// reference Gaussian measure N_Q, the Ornstein-Uhlenbeck operator family
// T_t, S_t, Q_t, and seeded sampling from N_Q.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gausslab/types.hpp"

namespace gausslab {

/// Eigenvalues lambda_1 >= ... >= lambda_n > 0 of Q in a truncation of
/// dimension n. Coordinates are taken in the eigenbasis e_1, ..., e_n.
class Spectrum {
 public:
  /// lambda_k = k^(-gamma), k = 1..n.
  static Spectrum power_law(double gamma, std::size_t n);

  /// Explicit eigenvalues. Input must already be non-increasing; unsorted
  /// input is rejected rather than sorted.
  static Spectrum from_values(const std::vector<double>& lambdas);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lambdas_.size()); }
  double operator[](std::size_t k) const { return lambdas_[static_cast<Eigen::Index>(k)]; }
  const Vector& eigenvalues() const noexcept { return lambdas_; }
  double trace() const noexcept { return trace_; }

  /// The first d modes. Experiments on cylinder functions only ever touch
  /// the coordinates their test functions and fields are based on.
  Spectrum leading(std::size_t d) const;

 private:
  explicit Spectrum(Vector lambdas);

  Vector lambdas_;
  double trace_ = 0.0;
};

/// Per-mode diagonal actions of the OU family at time t:
///   tau_k   = exp(-t / (2 lambda_k))        (T_t)
///   sigma_k = sqrt(1 - tau_k^2)             (S_t)
///   qt_k    = lambda_k sigma_k^2            (Q_t = Q S_t^2)
///   alpha_k = 1 / (2 lambda_k)
struct OUOperators {
  double time = 0.0;
  Vector tau;
  Vector sigma;
  Vector qt;
  Vector alpha;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(tau.size()); }
};

OUOperators ou_operators(const Spectrum& spectrum, double t);

/// m draws from N_Q stored column-wise (data is n x m). Sample chunk c
/// (kSampleChunk columns) is drawn from an engine seeded with
/// derive_seed(seed, c), coordinate-major within a sample, so a batch is a
/// pure function of (spectrum, m, seed).
class SampleBatch {
 public:
  SampleBatch(Spectrum spectrum, std::uint64_t seed, Matrix data);

  const Spectrum& spectrum() const noexcept { return spectrum_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  const Matrix& data() const noexcept { return data_; }
  auto sample(std::size_t j) const { return data_.col(static_cast<Eigen::Index>(j)); }

  const std::optional<Vector>& log_weights() const noexcept { return log_weights_; }
  void set_log_weights(Vector log_weights);

 private:
  Spectrum spectrum_;
  std::uint64_t seed_;
  Matrix data_;
  std::optional<Vector> log_weights_;
};

SampleBatch sample_gaussian(const Spectrum& spectrum, std::size_t m, std::uint64_t seed);

/// (T x + S y, -S x + T y). Orthogonal on H x H, hence leaves N_Q x N_Q
/// invariant.
std::pair<Vector, Vector> rotate_pair(const Vector& x, const Vector& y, const OUOperators& ops);

}  // namespace gausslab
