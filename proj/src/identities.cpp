#include "gausslab/identities.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

#include "gausslab/calculus.hpp"
#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/rng.hpp"

namespace gausslab {

namespace {

void check_exponent(const QuadraticForm& qf, double eps) {
  for (Eigen::Index k = 0; k < qf.betas().size(); ++k) {
    if (!(1.0 + 2.0 * eps * qf.betas()[k] > 0.0)) {
      std::ostringstream msg;
      msg << "1 + 2 eps beta <= 0 for eigenvalue beta_" << k + 1 << " = " << qf.betas()[k] << " at eps = " << eps;
      fail(ErrorKind::divergent_integral, msg.str());
    }
  }
}

double log_det_half(const QuadraticForm& qf, double eps) {
  check_exponent(qf, eps);
  return -0.5 * (2.0 * eps * qf.betas().array()).log1p().sum();
}

// Draws of <Lx, x> for x ~ N_Q, one per column chunk, fed to `body`.
MultiEstimate sample_form(const QuadraticForm& qf, std::size_t samples, std::uint64_t seed,
                          const std::function<double(double)>& body) {
  const Vector scale = qf.lambdas().cwiseSqrt();
  const Eigen::Index n = scale.size();
  Matrix values(1, static_cast<Eigen::Index>(samples));
  const std::size_t chunks = (samples + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Engine engine(derive_seed(seed, c));
    std::normal_distribution<double> normal;
    Vector x(n);
    const std::size_t end = std::min(samples, (c + 1) * kSampleChunk);
    for (std::size_t j = c * kSampleChunk; j < end; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) x[k] = scale[k] * normal(engine);
      values(0, static_cast<Eigen::Index>(j)) = body(x.dot(qf.l() * x));
    }
  });
  return sample_mean(values);
}

}  // namespace

QuadraticForm::QuadraticForm(Matrix l, const Spectrum& spectrum) : l_(std::move(l)) {
  const auto n = l_.rows();
  if (l_.cols() != n || n == 0 || n > static_cast<Eigen::Index>(spectrum.dim())) {
    fail(ErrorKind::shape, "quadratic form needs a square matrix within the truncation");
  }
  lambdas_ = spectrum.eigenvalues().head(n);
  const Vector root = lambdas_.cwiseSqrt();
  m_ = root.asDiagonal() * l_ * root.asDiagonal();
  const Matrix ls = 0.5 * (l_ + l_.transpose());
  ms_ = root.asDiagonal() * ls * root.asDiagonal();
  betas_ = Eigen::SelfAdjointEigenSolver<Matrix>(ms_, Eigen::EigenvaluesOnly).eigenvalues();
}

bool QuadraticForm::symmetric() const { return (l_ - l_.transpose()).cwiseAbs().maxCoeff() == 0.0; }

double QuadraticForm::trace_power(int k) const { return betas_.array().pow(k).sum(); }

double exp_quadratic_integral(const QuadraticForm& qf, double eps) { return std::exp(log_det_half(qf, eps)); }

double log_laplace_S(const QuadraticForm& qf, double eps) {
  return std::exp(log_det_half(qf, eps) + eps * qf.ms().trace());
}

double quadratic_cumulant(const QuadraticForm& qf, int m) {
  if (m < 1) fail(ErrorKind::domain, "cumulant order must be >= 1");
  if (m == 1) return 0.0;
  double coeff = std::ldexp(1.0, m - 1);
  for (int k = 2; k < m; ++k) coeff *= k;
  return coeff * qf.trace_power(m);
}

double moment_from_cumulants(const std::vector<double>& kappa, int m) {
  if (m < 0 || static_cast<int>(kappa.size()) <= m) fail(ErrorKind::domain, "not enough cumulants");
  std::vector<double> mu(static_cast<std::size_t>(m) + 1, 0.0);
  mu[0] = 1.0;
  for (int j = 1; j <= m; ++j) {
    double binom = 1.0;  // C(j-1, k-1)
    double acc = 0.0;
    for (int k = 1; k <= j; ++k) {
      acc += binom * kappa[static_cast<std::size_t>(k)] * mu[static_cast<std::size_t>(j - k)];
      binom = binom * (j - k) / k;
    }
    mu[static_cast<std::size_t>(j)] = acc;
  }
  return mu[static_cast<std::size_t>(m)];
}

double central_moment(const QuadraticForm& qf, int m) {
  if (m < 1) fail(ErrorKind::domain, "moment order must be >= 1");
  if (m > 12) fail(ErrorKind::domain, "central moments above order 12 are refused");
  std::vector<double> kappa(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = 1; k <= m; ++k) kappa[static_cast<std::size_t>(k)] = quadratic_cumulant(qf, k);
  return moment_from_cumulants(kappa, m);
}

double single_trace_ratio(const QuadraticForm& qf, int m) {
  const double tr = qf.trace_power(m);
  if (tr == 0.0) fail(ErrorKind::degenerate, "Tr[M_s^m] vanishes");
  return central_moment(qf, m) / tr;
}

Estimate mc_exp_quadratic(const QuadraticForm& qf, double eps, std::size_t samples, std::uint64_t seed) {
  return sample_form(qf, samples, seed, [eps](double v) { return std::exp(-eps * v); }).component(0);
}

Estimate mc_central_moment(const QuadraticForm& qf, int m, std::size_t samples, std::uint64_t seed) {
  const double centre = qf.trace_m();
  return sample_form(qf, samples, seed, [m, centre](double v) { return std::pow(v - centre, m); }).component(0);
}

DivergenceProbe divq_lp_probe(const CylinderVectorField& g, const Spectrum& spectrum, double p,
                              const SampleBatch& batch, double t) {
  if (!(p > 1.0)) fail(ErrorKind::domain, "divergence probe needs p > 1");
  const auto n = static_cast<Eigen::Index>(g.base_dim());
  const Vector inv_root = spectrum.eigenvalues().head(n).cwiseSqrt().cwiseInverse();
  const std::size_t m = batch.size();
  Matrix values(2, static_cast<Eigen::Index>(m));
  parallel_for(m, [&](std::size_t j) {
    const auto x = batch.sample(j);
    const Vector v = g.value(t, x);
    const Matrix jac = g.jacobian(t, x);
    values(0, static_cast<Eigen::Index>(j)) = std::pow(std::abs(div_q(g, spectrum, t, x)), p);
    values(1, static_cast<Eigen::Index>(j)) = jac.squaredNorm() + std::pow(v.cwiseProduct(inv_root).norm(), p);
  });
  if (!values.row(0).allFinite()) fail(ErrorKind::integrability, "divergent term int |div_Q G|^p");
  if (!values.row(1).allFinite()) fail(ErrorKind::integrability, "divergent term int ||DG||^2 + |Q^{-1/2}G|^p");
  const MultiEstimate est = sample_mean(values);
  DivergenceProbe out{est.component(0), est.component(1), 0.0};
  out.ratio = out.rhs_core.value > 0.0 ? out.lhs.value / out.rhs_core.value : 0.0;
  return out;
}

}  // namespace gausslab
