#include "gausslab/spectrum.hpp"

#include <cmath>
#include <sstream>

#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"
#include "gausslab/rng.hpp"

namespace gausslab {

Spectrum::Spectrum(Vector lambdas) : lambdas_(std::move(lambdas)), trace_(lambdas_.sum()) {}

Spectrum Spectrum::power_law(double gamma, std::size_t n) {
  if (n == 0) fail(ErrorKind::invalid_spectrum, "truncation dimension must be at least 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::invalid_spectrum, "power-law exponent must be positive");
  }
  Vector lambdas(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    lambdas[static_cast<Eigen::Index>(k)] = std::pow(static_cast<double>(k + 1), -gamma);
  }
  return Spectrum(std::move(lambdas));
}

Spectrum Spectrum::from_values(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorKind::invalid_spectrum, "empty eigenvalue list");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
      std::ostringstream msg;
      msg << "eigenvalue " << k + 1 << " = " << values[k] << " is not a positive finite number";
      fail(ErrorKind::invalid_spectrum, msg.str());
    }
    if (k > 0 && values[k] > values[k - 1]) {
      std::ostringstream msg;
      msg << "eigenvalues must be non-increasing: lambda_" << k + 1 << " = " << values[k]
          << " > lambda_" << k << " = " << values[k - 1];
      fail(ErrorKind::ordering, msg.str());
    }
  }
  return Spectrum(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
}

Spectrum Spectrum::leading(std::size_t d) const {
  if (d == 0 || d > dim()) {
    fail(ErrorKind::shape, "leading(" + std::to_string(d) + ") of a spectrum of dimension " +
                               std::to_string(dim()));
  }
  return Spectrum(lambdas_.head(static_cast<Eigen::Index>(d)));
}

OUOperators ou_operators(const Spectrum& spectrum, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorKind::domain, "OU time must be finite and >= 0");
  const Eigen::Index n = static_cast<Eigen::Index>(spectrum.dim());
  OUOperators ops;
  ops.time = t;
  ops.tau.resize(n);
  ops.sigma.resize(n);
  ops.qt.resize(n);
  ops.alpha.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = spectrum.eigenvalues()[k];
    ops.alpha[k] = 0.5 / lambda;
    ops.tau[k] = std::exp(-0.5 * t / lambda);
    // 1 - tau^2 without cancellation for small t / lambda.
    const double sigma2 = -std::expm1(-t / lambda);
    ops.sigma[k] = std::sqrt(sigma2);
    ops.qt[k] = lambda * sigma2;
  }
  return ops;
}

SampleBatch::SampleBatch(Spectrum spectrum, std::uint64_t seed, Matrix data)
    : spectrum_(std::move(spectrum)), seed_(seed), data_(std::move(data)) {
  if (static_cast<std::size_t>(data_.rows()) != spectrum_.dim()) {
    fail(ErrorKind::shape, "sample rows do not match the spectrum dimension");
  }
}

void SampleBatch::set_log_weights(Vector log_weights) {
  if (log_weights.size() != data_.cols()) fail(ErrorKind::shape, "one log-weight per sample required");
  log_weights_ = std::move(log_weights);
}

SampleBatch sample_gaussian(const Spectrum& spectrum, std::size_t m, std::uint64_t seed) {
  if (m == 0) fail(ErrorKind::empty_batch, "sample count must be at least 1");
  const Eigen::Index n = static_cast<Eigen::Index>(spectrum.dim());
  const Vector scale = spectrum.eigenvalues().cwiseSqrt();
  Matrix data(n, static_cast<Eigen::Index>(m));
  const std::size_t chunks = (m + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine(derive_seed(seed, c));
    std::normal_distribution<double> normal;
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(m, begin + kSampleChunk);
    for (std::size_t j = begin; j < end; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        data(k, static_cast<Eigen::Index>(j)) = scale[k] * normal(engine);
      }
    }
  });
  return SampleBatch(spectrum, seed, std::move(data));
}

std::pair<Vector, Vector> rotate_pair(const Vector& x, const Vector& y, const OUOperators& ops) {
  const Eigen::Index n = static_cast<Eigen::Index>(ops.dim());
  if (x.size() != n || y.size() != n) {
    fail(ErrorKind::shape, "rotate_pair expects points of dimension " + std::to_string(n));
  }
  Vector xr = ops.tau.cwiseProduct(x) + ops.sigma.cwiseProduct(y);
  Vector yr = ops.tau.cwiseProduct(y) - ops.sigma.cwiseProduct(x);
  return {std::move(xr), std::move(yr)};
}

}  // namespace gausslab
