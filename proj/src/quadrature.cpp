#include "gausslab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"
#include "gausslab/rng.hpp"

namespace gausslab {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights the squared first eigenvector components times the total mass.
void golub_welsch(const Vector& diagonal, const Vector& offdiagonal, double mass, Vector& points,
                  Vector& weights) {
  const Eigen::Index n = diagonal.size();
  Matrix jacobi = Matrix::Zero(n, n);
  jacobi.diagonal() = diagonal;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiagonal[i];
    jacobi(i + 1, i) = offdiagonal[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  points = solver.eigenvalues();
  weights = mass * solver.eigenvectors().row(0).transpose().array().square();
}

// One tensor rule over `lambdas.head(r)` with `nodes` points per mode, the
// remaining coordinates of y held fixed by the caller.
void tensor_rule(const Vector& lambdas, std::size_t r, std::size_t nodes, Vector& y,
                 const Integrand& h, Vector& acc, Vector& scratch) {
  Vector points, weights;
  hermite_rule(nodes, points, weights);
  const Vector scale = lambdas.head(static_cast<Eigen::Index>(r)).cwiseSqrt();
  std::vector<std::size_t> index(r, 0);
  acc.setZero();
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < r; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto ik = static_cast<Eigen::Index>(index[k]);
      y[kk] = scale[kk] * points[ik];
      w *= weights[ik];
    }
    h(y, scratch);
    acc += w * scratch;
    std::size_t k = 0;
    while (k < r && ++index[k] == nodes) index[k++] = 0;
    if (k == r) break;
  }
}

MultiEstimate monte_carlo(const Vector& lambdas, std::size_t width, const Integrand& h,
                          const MonteCarlo& mc) {
  const Eigen::Index d = lambdas.size();
  const Vector scale = lambdas.cwiseSqrt();
  Matrix values(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(mc.samples));
  const std::size_t chunks = (mc.samples + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine(derive_seed(mc.seed, c));
    std::normal_distribution<double> normal;
    Vector y(d), out(static_cast<Eigen::Index>(width));
    const std::size_t end = std::min(mc.samples, (c + 1) * kSampleChunk);
    for (std::size_t j = c * kSampleChunk; j < end; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) y[k] = scale[k] * normal(engine);
      h(y, out);
      values.col(static_cast<Eigen::Index>(j)) = out;
    }
  });
  return sample_mean(values);
}

MultiEstimate hermite(const Vector& lambdas, std::size_t width, const Integrand& h,
                      const GaussHermite& gh) {
  const Eigen::Index d = lambdas.size();
  const std::size_t r = std::min<std::size_t>(gh.retained_modes, static_cast<std::size_t>(d));
  const auto w = static_cast<Eigen::Index>(width);
  const bool remainder = static_cast<Eigen::Index>(r) < d;
  const std::size_t draws = remainder ? gh.remainder_samples : 1;
  const Vector tail_scale = lambdas.tail(d - static_cast<Eigen::Index>(r)).cwiseSqrt();

  Matrix fine(w, static_cast<Eigen::Index>(draws)), coarse(w, static_cast<Eigen::Index>(draws));
  const std::size_t chunks = (draws + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine(derive_seed(gh.seed, c));
    std::normal_distribution<double> normal;
    Vector y = Vector::Zero(d), acc(w), scratch(w);
    const std::size_t end = std::min(draws, (c + 1) * kSampleChunk);
    for (std::size_t j = c * kSampleChunk; j < end; ++j) {
      for (Eigen::Index k = 0; k < tail_scale.size(); ++k) {
        y[static_cast<Eigen::Index>(r) + k] = tail_scale[k] * normal(engine);
      }
      tensor_rule(lambdas, r, gh.nodes, y, h, acc, scratch);
      fine.col(static_cast<Eigen::Index>(j)) = acc;
      tensor_rule(lambdas, r, gh.nodes - 1, y, h, acc, scratch);
      coarse.col(static_cast<Eigen::Index>(j)) = acc;
    }
  });
  MultiEstimate est;
  if (remainder) {
    est = sample_mean(fine);
  } else {
    est.mean = fine.col(0);
    est.cov = Matrix::Zero(w, w);
  }
  const Vector rule_error = fine.rowwise().mean() - coarse.rowwise().mean();
  est.cov += rule_error * rule_error.transpose();
  return est;
}

}  // namespace

void validate(const QuadratureSpec& q) {
  if (const auto* mc = std::get_if<MonteCarlo>(&q)) {
    if (mc->samples < 2) fail(ErrorKind::config, "Monte Carlo quadrature needs at least 2 samples");
    return;
  }
  const auto& gh = std::get<GaussHermite>(q);
  if (gh.nodes < 2 || gh.nodes > kMaxHermiteNodes) {
    fail(ErrorKind::config, "Gauss-Hermite nodes per mode must lie in [2, 20]");
  }
  if (gh.retained_modes < 1 || gh.retained_modes > kMaxRetainedModes) {
    fail(ErrorKind::config, "Gauss-Hermite retained modes must lie in [1, 6]");
  }
  if (gh.remainder_samples < 2) fail(ErrorKind::config, "remainder Monte Carlo needs at least 2 samples");
}

QuadratureSpec reseeded(const QuadratureSpec& q, std::uint64_t stream) {
  return std::visit(
      [stream](auto rule) -> QuadratureSpec {
        rule.seed = derive_seed(rule.seed, stream);
        return rule;
      },
      q);
}

Estimate MultiEstimate::component(Eigen::Index i) const {
  return {mean[i], std::sqrt(std::max(0.0, cov(i, i)))};
}

Estimate MultiEstimate::combine(const Vector& c) const {
  return {c.dot(mean), std::sqrt(std::max(0.0, c.dot(cov * c)))};
}

MultiEstimate gaussian_expectation(const Vector& lambdas, std::size_t width, const Integrand& h,
                                   const QuadratureSpec& q) {
  validate(q);
  if (lambdas.size() == 0) fail(ErrorKind::shape, "expectation over zero modes");
  if (const auto* mc = std::get_if<MonteCarlo>(&q)) return monte_carlo(lambdas, width, h, *mc);
  return hermite(lambdas, width, h, std::get<GaussHermite>(q));
}

void hermite_rule(std::size_t nodes, Vector& points, Vector& weights) {
  if (nodes == 0) fail(ErrorKind::domain, "Gauss-Hermite rule needs at least one node");
  const auto n = static_cast<Eigen::Index>(nodes);
  Vector off(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) off[i] = std::sqrt(static_cast<double>(i + 1));
  golub_welsch(Vector::Zero(n), off, 1.0, points, weights);
}

void legendre_rule(std::size_t nodes, Vector& points, Vector& weights) {
  if (nodes == 0) fail(ErrorKind::domain, "Gauss-Legendre rule needs at least one node");
  const auto n = static_cast<Eigen::Index>(nodes);
  Vector off(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double k = static_cast<double>(i + 1);
    off[i] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  golub_welsch(Vector::Zero(n), off, 2.0, points, weights);
  // [-1, 1] -> [0, 1]
  points = 0.5 * (points.array() + 1.0);
  weights *= 0.5;
}

MultiEstimate sample_mean(const Matrix& values) {
  const Eigen::Index m = values.cols();
  if (m < 2) fail(ErrorKind::empty_batch, "at least two samples are needed for a standard error");
  MultiEstimate est;
  est.mean = values.rowwise().mean();
  const Matrix centered = values.colwise() - est.mean;
  est.cov = (centered * centered.transpose()) / (static_cast<double>(m) * static_cast<double>(m - 1));
  return est;
}

}  // namespace gausslab
