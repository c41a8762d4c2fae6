#include "gausslab/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"

namespace gausslab {

namespace {

Eigen::Index ix(std::size_t n) { return static_cast<Eigen::Index>(n); }

void require_positive(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::domain, "the density needs eps > 0");
}

void check_point(const Spectrum& spectrum, std::size_t base, ConstVectorRef x) {
  if (base > spectrum.dim()) fail(ErrorKind::shape, "function based beyond the truncation");
  if (x.size() < ix(base)) fail(ErrorKind::shape, "point shorter than the function base");
}

// Per-mode pieces of the kernel on the first d modes.
struct Kernel {
  Vector tau, qt;
};

Kernel kernel(const Spectrum& spectrum, double eps, Eigen::Index d) {
  const OUOperators ops = ou_operators(spectrum.leading(static_cast<std::size_t>(d)), eps);
  return {ops.tau, ops.qt};
}

}  // namespace

Vector active_lambdas(const Spectrum& spectrum, std::size_t base_dim) {
  return spectrum.eigenvalues().head(ix(base_dim));
}

Estimate mehler_apply(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                      ConstVectorRef x, const QuadratureSpec& q) {
  check_point(spectrum, u.base_dim(), x);
  if (!(eps >= 0.0)) fail(ErrorKind::domain, "mehler_apply needs eps >= 0");
  if (eps == 0.0) return {u(t, x), 0.0};
  const auto d = ix(u.base_dim());
  const OUOperators ops = ou_operators(spectrum.leading(u.base_dim()), eps);
  const Vector tx = ops.tau.cwiseProduct(x.head(d));
  const MultiEstimate est = gaussian_expectation(
      active_lambdas(spectrum, u.base_dim()), 1,
      [&](ConstVectorRef y, VectorRef out) {
        const Vector z = tx + ops.sigma.cwiseProduct(y);
        out[0] = u(t, z);
      },
      q);
  return est.component(0);
}

Estimate density_apply(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                       ConstVectorRef x, const QuadratureSpec& q) {
  check_point(spectrum, u.base_dim(), x);
  require_positive(eps);
  const auto d = ix(u.base_dim());
  const Vector xa = x.head(d);
  const MultiEstimate est = gaussian_expectation(
      active_lambdas(spectrum, u.base_dim()), 1,
      [&](ConstVectorRef y, VectorRef out) { out[0] = u(t, y) * density_rho(spectrum, eps, xa, y); }, q);
  return est.component(0);
}

double density_log_rho(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  require_positive(eps);
  if (x.size() != y.size() || x.size() > ix(spectrum.dim())) fail(ErrorKind::shape, "density: bad shapes");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double lambda = spectrum.eigenvalues()[k];
    const double tau = std::exp(-0.5 * eps / lambda);
    const double sigma2 = -std::expm1(-eps / lambda);
    acc += -0.5 * std::log(sigma2) -
           (tau * tau * x[k] * x[k] - 2.0 * tau * x[k] * y[k] + tau * tau * y[k] * y[k]) /
               (2.0 * lambda * sigma2);
  }
  return acc;
}

double density_rho(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  return std::exp(density_log_rho(spectrum, eps, x, y));
}

Vector density_grad_x(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  require_positive(eps);
  if (x.size() != y.size()) fail(ErrorKind::shape, "density: bad shapes");
  const Kernel k = kernel(spectrum, eps, x.size());
  return (k.tau.array() * (y.array() - k.tau.array() * x.array()) / k.qt.array()).matrix();
}

Vector density_grad_y(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  require_positive(eps);
  if (x.size() != y.size()) fail(ErrorKind::shape, "density: bad shapes");
  const Kernel k = kernel(spectrum, eps, x.size());
  return (k.tau.array() * (x.array() - k.tau.array() * y.array()) / k.qt.array()).matrix();
}

Vector density_full_grad_x(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  return density_rho(spectrum, eps, x, y) * density_grad_x(spectrum, eps, x, y);
}

Vector density_full_grad_y(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y) {
  return density_rho(spectrum, eps, x, y) * density_grad_y(spectrum, eps, x, y);
}

GradientEstimate grad_mehler_unchecked(const CylinderFunction& u, const Spectrum& spectrum, double eps,
                                       double t, ConstVectorRef x, const QuadratureSpec& q,
                                       GradientForm form) {
  check_point(spectrum, u.base_dim(), x);
  const auto d = ix(u.base_dim());
  if (form == GradientForm::weight) require_positive(eps);
  if (!(eps >= 0.0)) fail(ErrorKind::domain, "grad_mehler needs eps >= 0");
  if (form == GradientForm::smooth && !u.differentiable()) {
    fail(ErrorKind::domain, "smooth-form gradient of non-differentiable '" + u.name() + "'");
  }
  if (eps == 0.0) return {u.gradient(t, x), Vector::Zero(d)};
  const OUOperators ops = ou_operators(spectrum.leading(u.base_dim()), eps);
  const Vector tx = ops.tau.cwiseProduct(x.head(d));
  // Q_eps^{-1} T_eps S_eps = tau / (lambda sigma)
  const Vector weight = ops.tau.cwiseProduct(ops.sigma).cwiseQuotient(ops.qt);
  const MultiEstimate est = gaussian_expectation(
      active_lambdas(spectrum, u.base_dim()), static_cast<std::size_t>(d),
      [&](ConstVectorRef y, VectorRef out) {
        const Vector z = tx + ops.sigma.cwiseProduct(y);
        if (form == GradientForm::smooth) {
          u.gradient(t, z, out);
          out.array() *= ops.tau.array();
        } else {
          out = u(t, z) * weight.cwiseProduct(y);
        }
      },
      q);
  return {est.mean, est.cov.diagonal().cwiseMax(0.0).cwiseSqrt()};
}

GradientEstimate grad_mehler(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                             ConstVectorRef x, const QuadratureSpec& q, GradientForm form) {
  GradientEstimate g = grad_mehler_unchecked(u, spectrum, eps, t, x, q, form);
  if (form == GradientForm::weight && g.std_error.norm() > 0.1 * g.value.norm()) {
    fail(ErrorKind::accuracy, "weight-form gradient: standard error " + std::to_string(g.std_error.norm()) +
                                  " exceeds 10% of |DP_eps u| = " + std::to_string(g.value.norm()));
  }
  return g;
}

Vector halton(std::size_t k, std::size_t d) {
  static constexpr unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                        43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};
  if (d > std::size(primes)) fail(ErrorKind::shape, "Halton points supported up to dimension 26");
  Vector out(ix(d));
  for (std::size_t i = 0; i < d; ++i) {
    double f = 1.0, r = 0.0;
    for (std::size_t n = k; n > 0; n /= primes[i]) {
      f /= primes[i];
      r += f * static_cast<double>(n % primes[i]);
    }
    out[ix(i)] = r;
  }
  return out;
}

std::vector<Vector> probe_points(const Spectrum& spectrum, std::size_t d, std::size_t count) {
  if (count == 0) fail(ErrorKind::config, "probe set must be nonempty");
  if (d == 0 || d > spectrum.dim()) fail(ErrorKind::shape, "probe dimension out of range");
  const double radius = 3.0 * std::sqrt(spectrum[0]);
  std::vector<Vector> points;
  points.reserve(count);
  points.push_back(Vector::Zero(ix(d)));
  // Halton points of the cube, kept when inside the unit ball.
  for (std::size_t k = 1; points.size() < count; ++k) {
    const Vector c = 2.0 * halton(k, d).array() - 1.0;
    if (c.squaredNorm() <= 1.0) points.push_back(radius * c);
  }
  return points;
}

SmoothingProbe smoothing_probe(const CylinderFunction& u, const Spectrum& spectrum,
                               const std::vector<double>& eps_grid, const QuadratureSpec& q, double t) {
  if (eps_grid.size() < 2) fail(ErrorKind::config, "smoothing probe needs at least two eps values");
  for (double e : eps_grid) require_positive(e);
  const std::vector<Vector> probes = probe_points(spectrum, u.base_dim());
  const GradientForm form = u.differentiable() ? GradientForm::smooth : GradientForm::weight;

  SmoothingProbe out;
  out.eps = eps_grid;
  for (const Vector& x : probes) out.sup_u = std::max(out.sup_u, std::abs(u(t, x)));

  for (double eps : eps_grid) {
    std::vector<GradientEstimate> grads(probes.size());
    parallel_for(probes.size(),
                 [&](std::size_t i) { grads[i] = grad_mehler_unchecked(u, spectrum, eps, t, probes[i], q, form); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < grads.size(); ++i) {
      if (grads[i].value.norm() > grads[best].value.norm()) best = i;
    }
    out.sup_gradient.push_back(grads[best].value.norm());
    out.std_error.push_back(grads[best].std_error.norm());
  }

  const double tiny = 1e-12 * std::max(1.0, out.sup_u);
  if (*std::max_element(out.sup_gradient.begin(), out.sup_gradient.end()) <= tiny) {
    out.degenerate = true;
    out.warning = "flat function: gradient vanishes on all probes, exponent reported as 0";
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(eps_grid.size());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double lx = std::log(eps_grid[i]);
    const double ly = std::log(std::max(out.sup_gradient[i], tiny));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.constant = std::exp((sy - out.slope * sx) / n);
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (out.sup_u > 0.0) {
      out.half_constant = std::max(out.half_constant, out.sup_gradient[i] * std::sqrt(eps_grid[i]) / out.sup_u);
    }
  }
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (out.std_error[i] > 0.1 * out.sup_gradient[i]) {
      out.warning = "standard error above 10% of the sup at eps = " + std::to_string(eps_grid[i]);
    }
  }
  return out;
}

}  // namespace gausslab
