#include "gausslab/calculus.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <memory>

#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"

namespace gausslab {

double div_q(const CylinderVectorField& f, const Spectrum& spectrum, double t, ConstVectorRef x) {
  const auto n = static_cast<Eigen::Index>(f.base_dim());
  if (x.size() < n || static_cast<Eigen::Index>(spectrum.dim()) < n) {
    fail(ErrorKind::shape, "div_q: point or spectrum shorter than the field base");
  }
  const Vector g = f.value(t, x);
  const Matrix jac = f.jacobian(t, x);
  const auto lambdas = spectrum.eigenvalues().head(n);
  return jac.trace() - (x.head(n).array() * g.array() / lambdas.array()).sum();
}

std::vector<double> uniform_grid(double horizon, std::size_t nodes) {
  if (nodes < 2 || !(horizon > 0.0)) fail(ErrorKind::config, "time grid needs >= 2 nodes and T > 0");
  std::vector<double> grid(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  return grid;
}

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorKind::config, "empty time grid");
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double h = grid[i + 1] - grid[i];
    if (!(h > 0.0)) fail(ErrorKind::config, "time grid must be strictly increasing");
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

Estimate norm_from_samples(const Vector& h, double s) {
  if (h.size() == 0) fail(ErrorKind::empty_batch, "norm of an empty sample");
  if (!h.allFinite()) fail(ErrorKind::integrability, "non-finite integrand in space-time norm");
  const double m = static_cast<double>(h.size());
  const double mean = h.mean();
  if (mean <= 0.0) return {0.0, 0.0};
  const double var = h.size() > 1 ? (h.array() - mean).square().sum() / (m - 1.0) : 0.0;
  const double value = std::pow(mean, 1.0 / s);
  return {value, value / (s * mean) * std::sqrt(var / m)};
}

Estimate norm_difference(const Vector& ha, const Vector& hb, double s) {
  if (ha.size() != hb.size() || ha.size() < 2) fail(ErrorKind::shape, "paired norms need equal samples");
  const double ma = ha.mean(), mb = hb.mean();
  const double va = ma > 0.0 ? std::pow(ma, 1.0 / s) : 0.0;
  const double vb = mb > 0.0 ? std::pow(mb, 1.0 / s) : 0.0;
  // Linearization of I^(1/s) around each mean.
  const double ga = ma > 0.0 ? va / (s * ma) : 0.0;
  const double gb = mb > 0.0 ? vb / (s * mb) : 0.0;
  const Vector d = ga * ha - gb * hb;
  const double m = static_cast<double>(d.size());
  const double var = (d.array() - d.mean()).square().sum() / (m - 1.0);
  return {va - vb, std::sqrt(var / m)};
}

Estimate space_time_norm(const std::function<double(double, ConstVectorRef)>& powered, double s,
                         const SampleBatch& batch, const std::vector<double>& grid) {
  if (!(s >= 1.0)) fail(ErrorKind::domain, "norm exponent must be >= 1");
  const std::vector<double> w = trapezoid_weights(grid);
  const std::size_t m = batch.size();
  Matrix h(1, static_cast<Eigen::Index>(m));
  parallel_for(m, [&](std::size_t j) {
    const auto x = batch.sample(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) acc += w[i] * powered(grid[i], x);
    h(0, static_cast<Eigen::Index>(j)) = acc;
  });
  return norm_from_samples(h.row(0).transpose(), s);
}

Estimate sobolev_norm(const CylinderVectorField& f, double s, const Spectrum&, const SampleBatch& batch,
                      const std::vector<double>& grid) {
  return space_time_norm(
      [&](double t, ConstVectorRef x) {
        const double hs = f.jacobian(t, x).norm();
        const double v = f.value(t, x).norm();
        return std::pow(hs, s) + std::pow(v, s);
      },
      s, batch, grid);
}

Estimate qhalf_inverse_norm(const CylinderVectorField& f, double s, const Spectrum& spectrum,
                            const SampleBatch& batch, const std::vector<double>& grid) {
  const auto n = static_cast<Eigen::Index>(f.base_dim());
  const Vector inv_root = spectrum.eigenvalues().head(n).cwiseSqrt().cwiseInverse();
  return space_time_norm(
      [&](double t, ConstVectorRef x) { return std::pow(f.value(t, x).cwiseProduct(inv_root).norm(), s); },
      s, batch, grid);
}

double schatten_power(const Matrix& a, double s) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().array().pow(s).sum();
}

Estimate schatten_trace_norm(const CylinderVectorField& f, double s, const SampleBatch& batch,
                             const std::vector<double>& grid) {
  return space_time_norm([&](double t, ConstVectorRef x) { return schatten_power(f.jacobian(t, x), s); },
                         s, batch, grid);
}

Estimate function_norm(const CylinderFunction& u, double r, const SampleBatch& batch,
                       const std::vector<double>& grid) {
  return space_time_norm([&](double t, ConstVectorRef x) { return std::pow(std::abs(u(t, x)), r); }, r,
                         batch, grid);
}

CylinderVectorField project_smooth(const CylinderVectorField& f, std::size_t target_dim,
                                   const Spectrum& spectrum, const SampleBatch& batch) {
  if (target_dim == 0) fail(ErrorKind::degenerate, "projection onto zero coordinates");
  if (target_dim > spectrum.dim()) fail(ErrorKind::shape, "projection dimension exceeds n");
  if (f.base_dim() <= target_dim) return f;
  const auto base = static_cast<Eigen::Index>(f.base_dim());
  const auto keep = static_cast<Eigen::Index>(target_dim);
  if (static_cast<Eigen::Index>(batch.dim()) < base) fail(ErrorKind::shape, "batch shorter than the field base");
  // Only the complementary coordinates of the draws are used.
  auto tails = std::make_shared<const Matrix>(batch.data().block(keep, 0, base - keep, batch.data().cols()));
  const double count = static_cast<double>(tails->cols());

  CylinderVectorField::Parts p;
  p.base_dim = target_dim;
  p.bounded = f.bounded();
  p.name = "project(" + f.name() + "," + std::to_string(target_dim) + ")";
  p.value = [f, tails, keep, base, count](double t, ConstVectorRef x, VectorRef out) {
    Vector z(base), g(base);
    z.head(keep) = x.head(keep);
    out.setZero();
    for (Eigen::Index j = 0; j < tails->cols(); ++j) {
      z.tail(base - keep) = tails->col(j);
      f.value(t, z, g);
      out += g.head(keep);
    }
    out /= count;
  };
  p.jacobian = [f, tails, keep, base, count](double t, ConstVectorRef x, MatrixRef out) {
    Vector z(base);
    Matrix jac(base, base);
    z.head(keep) = x.head(keep);
    out.setZero();
    for (Eigen::Index j = 0; j < tails->cols(); ++j) {
      z.tail(base - keep) = tails->col(j);
      f.jacobian(t, z, jac);
      out += jac.topLeftCorner(keep, keep);
    }
    out /= count;
  };
  return CylinderVectorField(std::move(p));
}

}  // namespace gausslab
