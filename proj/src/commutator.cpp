#include "gausslab/commutator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "gausslab/calculus.hpp"
#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"

namespace gausslab {

namespace {

Eigen::Index ix(std::size_t n) { return static_cast<Eigen::Index>(n); }

// Per-mode coefficients of one w-node of the xi rule.
struct XiNode {
  double weight;  // Gauss-Legendre weight times d xi / d w = 2 w
  Vector t, s, b; // T_{eps xi}, S_{eps xi}, lambda^-1 T/S
};

std::vector<XiNode> xi_rule(const Vector& lambdas, double eps, std::size_t nodes) {
  Vector w, wt;
  legendre_rule(nodes, w, wt);
  std::vector<XiNode> rule;
  rule.reserve(nodes);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double xi = w[i] * w[i];
    XiNode node{wt[i] * 2.0 * w[i], Vector(lambdas.size()), Vector(lambdas.size()), Vector(lambdas.size())};
    for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
      const double a = eps * xi / lambdas[k];
      node.t[k] = std::exp(-0.5 * a);
      node.s[k] = std::sqrt(-std::expm1(-a));
      node.b[k] = node.t[k] / (lambdas[k] * node.s[k]);
    }
    rule.push_back(std::move(node));
  }
  return rule;
}

// Integrand of the xi-integrals at one node: returns the pair
// (<a DF b y_xi, y_xi> - Tr DG, div_Q G) with G = lambda a b F.
std::pair<double, double> xi_terms(const CylinderVectorField& f, double t, const XiNode& node, const Vector& a,
                                   const Vector& lambdas, const Vector& x, const Vector& y, Vector& xq,
                                   Vector& yq, Vector& g, Matrix& jac) {
  const auto nf = g.size();
  xq = node.t.cwiseProduct(x) + node.s.cwiseProduct(y);
  yq = node.t.cwiseProduct(y) - node.s.cwiseProduct(x);
  f.value(t, xq, g);
  f.jacobian(t, xq, jac);
  double quad = 0.0, trace = 0.0, inner = 0.0;
  for (Eigen::Index k = 0; k < nf; ++k) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < nf; ++j) row += jac(k, j) * node.b[j] * yq[j];
    quad += a[k] * row * yq[k];
    const double ab = a[k] * node.b[k];
    trace += lambdas[k] * ab * jac(k, k);
    inner += ab * g[k] * xq[k];
  }
  return {quad - trace, trace - inner};
}

}  // namespace

ExponentTriple ExponentTriple::make(double p, double r, double s) {
  std::ostringstream msg;
  if (!(p > 2.0) || !std::isfinite(p)) msg << "p must be > 2 (got " << p << ")";
  else if (!(r >= 1.0) || !std::isfinite(r)) msg << "r must be >= 1 (got " << r << ")";
  else if (!(s > 1.0 && s <= 2.0)) msg << "s must lie in (1, 2] (got " << s << ")";
  else {
    const double gap = (p - 1.0) / p - (1.0 / r + 1.0 / s);
    if (std::abs(gap) > 1e-12) {
      msg << "exponents violate 1/p' = 1/r + 1/s: 1/p' = " << (p - 1.0) / p << ", 1/r + 1/s = " << 1.0 / r + 1.0 / s;
    }
  }
  if (!msg.str().empty()) fail(ErrorKind::config, msg.str());
  return ExponentTriple{p, r, s};
}

Estimate CommutatorBreakdown::representation_gap() const {
  Vector c = Vector::Zero(est.mean.size());
  c[0] = 1.0;
  c[1] = -1.0;
  c[2] = -1.0;
  return est.combine(c);
}

Estimate CommutatorBreakdown::split_gap() const {
  Vector c = Vector::Zero(est.mean.size());
  c[2] = 1.0;
  c[3] = -1.0;
  c[4] = -1.0;
  return est.combine(c);
}

CommutatorBreakdown commutator_breakdown(const CylinderFunction& u, const CylinderVectorField& f,
                                         const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                         const QuadratureSpec& q, const CommutatorOptions& options) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::domain, "commutator needs eps > 0");
  if (!u.differentiable()) fail(ErrorKind::domain, "commutator needs differentiable u ('" + u.name() + "')");
  const std::size_t d = std::max(u.base_dim(), f.base_dim());
  if (d > spectrum.dim() || x.size() < ix(d)) fail(ErrorKind::shape, "commutator: point or spectrum too short");
  const auto nd = ix(d), nu = ix(u.base_dim()), nf = ix(f.base_dim());
  const Vector lambdas = spectrum.eigenvalues().head(nd);
  const OUOperators ops = ou_operators(spectrum.leading(d), eps);
  Vector a(nd);
  for (Eigen::Index k = 0; k < nd; ++k) {
    a[k] = ops.tau[k] / (lambdas[k] * ops.sigma[k]);
    if (!(ops.sigma[k] > 0.0) || !std::isfinite(a[k])) {
      fail(ErrorKind::singular_mode, "S_eps vanishes numerically on mode " + std::to_string(k + 1) +
                                         " (eps = " + std::to_string(eps) + ")");
    }
  }
  const Vector xa = x.head(nd);
  const Vector fx = f.value(t, xa);
  const std::vector<XiNode> fine = options.split ? xi_rule(lambdas, eps, options.xi_nodes) : std::vector<XiNode>{};
  const std::vector<XiNode> coarse =
      options.split ? xi_rule(lambdas, eps, std::max<std::size_t>(2, options.xi_nodes / 2 + 1)) : std::vector<XiNode>{};
  const Vector lf = lambdas.head(nf), af = a.head(nf);
  const Eigen::Index common = std::min(nu, nf);

  const MultiEstimate est = gaussian_expectation(
      lambdas, 7,
      [&](ConstVectorRef y, VectorRef out) {
        const Vector z = ops.tau.cwiseProduct(xa) + ops.sigma.cwiseProduct(y);
        const Vector w = ops.tau.cwiseProduct(y) - ops.sigma.cwiseProduct(xa);
        const double uz = u(t, z);
        const Vector du = u.gradient(t, z);
        const Vector fz = f.value(t, z);
        const Matrix jz = f.jacobian(t, z);
        double direct = 0.0;
        for (Eigen::Index k = 0; k < common; ++k) direct += (fx[k] * ops.tau[k] - fz[k]) * du[k];
        double divq = jz.trace();
        double g_new = 0.0, g_old = 0.0;
        for (Eigen::Index k = 0; k < nf; ++k) {
          divq -= z[k] * fz[k] / lambdas[k];
          g_new += a[k] * fz[k] * w[k];
          g_old += a[k] * fx[k] * y[k];
        }
        out[0] = direct;
        out[1] = divq * uz;
        out[2] = -(g_new - g_old) * uz;
        out.tail(4).setZero();
        if (!options.split) return;
        Vector xq(nd), yq(nd), g(nf);
        Matrix jac(nf, nf);
        const Vector yv = y;
        auto accumulate = [&](const std::vector<XiNode>& rule, double& s21, double& s22) {
          s21 = s22 = 0.0;
          for (const XiNode& node : rule) {
            const auto [q1, q2] = xi_terms(f, t, node, af, lf, xa, yv, xq, yq, g, jac);
            s21 += node.weight * q1;
            s22 += node.weight * q2;
          }
        };
        double s21, s22, c21, c22;
        accumulate(fine, s21, s22);
        accumulate(coarse, c21, c22);
        out[3] = -0.5 * eps * s21 * uz;
        out[4] = -0.5 * eps * s22 * uz;
        out[5] = -0.5 * eps * c21 * uz;
        out[6] = -0.5 * eps * c22 * uz;
      },
      q);

  CommutatorBreakdown result;
  result.est.mean = est.mean.head(5);
  result.est.cov = est.cov.topLeftCorner(5, 5);
  result.xi_error_b21 = std::abs(est.mean[3] - est.mean[5]);
  result.xi_error_b22 = std::abs(est.mean[4] - est.mean[6]);
  const double scale = std::max(std::abs(result.est.mean[0]), std::max(std::abs(result.est.mean[1]), 1e-300));
  result.accuracy_flag = result.direct().std_error > 0.1 * scale && result.direct().std_error > 1e-12;
  return result;
}

CommutatorValue commutator_direct(const CylinderFunction& u, const CylinderVectorField& f,
                                  const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                  const QuadratureSpec& q) {
  const CommutatorBreakdown b = commutator_breakdown(u, f, spectrum, eps, t, x, q, {33, false});
  return {b.direct(), b.accuracy_flag};
}

CommutatorRep commutator_rep(const CylinderFunction& u, const CylinderVectorField& f, const Spectrum& spectrum,
                             double eps, double t, ConstVectorRef x, const QuadratureSpec& q) {
  const CommutatorBreakdown b = commutator_breakdown(u, f, spectrum, eps, t, x, q, {33, false});
  Vector c = Vector::Zero(5);
  c[1] = c[2] = 1.0;
  return {b.b1(), b.b2(), b.est.combine(c)};
}

CommutatorSplit commutator_b2_split(const CylinderFunction& u, const CylinderVectorField& f,
                                    const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                    const QuadratureSpec& q, std::size_t xi_nodes) {
  const CommutatorBreakdown b = commutator_breakdown(u, f, spectrum, eps, t, x, q, {xi_nodes, true});
  Vector c = Vector::Zero(5);
  c[3] = c[4] = 1.0;
  return {b.b21(), b.b22(), b.est.combine(c), b.xi_error()};
}

double operator_bound_mode(double alpha, double eps, double xi) {
  const double e1 = std::exp(-alpha * eps);
  const double e2 = std::exp(-alpha * eps * xi);
  return 2.0 * alpha * e1 * e2 / (std::sqrt(-std::expm1(-2.0 * alpha * eps)) * std::sqrt(-std::expm1(-2.0 * alpha * eps * xi)));
}

OperatorBound operator_bound_check(const Spectrum& spectrum, double eps, double xi, double constant) {
  if (!(eps > 0.0)) fail(ErrorKind::domain, "operator bound needs eps > 0");
  if (!(xi > 0.0 && xi <= 1.0)) fail(ErrorKind::domain, "operator bound needs 0 < xi <= 1");
  const OUOperators at_eps = ou_operators(spectrum, eps);
  const OUOperators at_xi = ou_operators(spectrum, eps * xi);
  OperatorBound out;
  for (std::size_t k = 0; k < spectrum.dim(); ++k) {
    const auto kk = ix(k);
    const double closed = operator_bound_mode(at_eps.alpha[kk], eps, xi);
    const double scan = (at_eps.tau[kk] / at_eps.sigma[kk]) * (at_xi.tau[kk] / at_xi.sigma[kk]) / spectrum[k];
    if (closed > out.sup_value) {
      out.sup_value = closed;
      out.argmax = k;
    }
    out.scan_value = std::max(out.scan_value, scan);
  }
  out.scaled = out.sup_value * eps * std::sqrt(xi);
  out.bound_rhs = constant / (eps * std::sqrt(xi));
  out.pass = out.sup_value <= out.bound_rhs;
  return out;
}

CommutatorSweep norm_sweep(const CylinderFunction& u, const CylinderVectorField& f, const Spectrum& spectrum,
                           const ExponentTriple& exponents, std::vector<double> eps_grid,
                           const SampleBatch& batch, const std::vector<double>& time_grid,
                           const SweepOptions& options) {
  if (eps_grid.empty()) fail(ErrorKind::config, "empty eps grid");
  for (double e : eps_grid) {
    if (!(e > 0.0)) fail(ErrorKind::config, "eps grid must be positive");
  }
  std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
  const std::vector<double> tw = trapezoid_weights(time_grid);
  const double pp = exponents.p_prime();
  const std::size_t m = batch.size();
  const std::size_t msub = std::min(options.decomposition_samples, m);

  CommutatorSweep sweep;
  sweep.u_name = u.name();
  sweep.f_name = f.name();
  sweep.exponents = exponents;
  sweep.constant = options.constant;
  sweep.u_norm = function_norm(u, exponents.r, batch, time_grid);
  sweep.f_sobolev = sobolev_norm(f, exponents.s, spectrum, batch, time_grid);
  sweep.f_qhalf = qhalf_inverse_norm(f, exponents.s, spectrum, batch, time_grid);
  sweep.f_schatten = schatten_trace_norm(f, exponents.s, batch, time_grid);
  for (const auto& [name, e] : {std::pair{"||u||_{L^r}", sweep.u_norm}, std::pair{"||F||_{1,s,T}", sweep.f_sobolev},
                                std::pair{"||Q^{-1/2}F||_{L^s}", sweep.f_qhalf}}) {
    if (!std::isfinite(e.value) || !std::isfinite(e.std_error)) {
      fail(ErrorKind::integrability, std::string("divergent norm ") + name);
    }
  }
  sweep.rhs_core = sweep.u_norm.value * (sweep.f_sobolev.value + sweep.f_qhalf.value);

  for (double eps : eps_grid) {
    SweepPoint point;
    point.eps = eps;
    Vector lhs(ix(m));
    Matrix pieces = Matrix::Zero(4, ix(msub));
    std::vector<double> inner_err(m, 0.0);
    parallel_for(m, [&](std::size_t j) {
      const auto x = batch.sample(j);
      const bool decompose = j < msub;
      double acc = 0.0;
      Eigen::Vector4d acc_pieces = Eigen::Vector4d::Zero();
      for (std::size_t i = 0; i < time_grid.size(); ++i) {
        const QuadratureSpec q = reseeded(options.inner, j * time_grid.size() + i);
        const CommutatorBreakdown b =
            commutator_breakdown(u, f, spectrum, eps, time_grid[i], x, q, {options.xi_nodes, decompose});
        acc += tw[i] * std::pow(std::abs(b.est.mean[0]), pp);
        inner_err[j] = std::max(inner_err[j], b.direct().std_error);
        if (decompose) {
          for (int c = 0; c < 4; ++c) acc_pieces[c] += tw[i] * std::pow(std::abs(b.est.mean[c + 1]), pp);
        }
      }
      lhs[ix(j)] = acc;
      if (decompose) pieces.col(ix(j)) = acc_pieces;
    });
    point.lhs = norm_from_samples(lhs, pp);
    if (msub > 0) {
      point.b1 = norm_from_samples(pieces.row(0).transpose(), pp);
      point.b2 = norm_from_samples(pieces.row(1).transpose(), pp);
      point.b21 = norm_from_samples(pieces.row(2).transpose(), pp);
      point.b22 = norm_from_samples(pieces.row(3).transpose(), pp);
    }
    point.inner_error = *std::max_element(inner_err.begin(), inner_err.end());
    point.ratio = sweep.rhs_core > 0.0 ? point.lhs.value / sweep.rhs_core : 0.0;
    point.bound = options.constant * sweep.rhs_core;
    point.pass = point.lhs.value <= point.bound;
    sweep.points.push_back(point);
  }

  sweep.bound_pass = std::all_of(sweep.points.begin(), sweep.points.end(), [](const SweepPoint& p) { return p.pass; });
  auto band = [](const Estimate& a, const Estimate& b) {
    return 3.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
  };
  const SweepPoint& first = sweep.points.front();
  const SweepPoint& last = sweep.points.back();
  sweep.endpoint_decrease = sweep.points.size() > 1 && first.lhs.value - last.lhs.value > band(first.lhs, last.lhs);
  sweep.monotone = true;
  for (std::size_t i = 0; i + 1 < sweep.points.size(); ++i) {
    const auto& a = sweep.points[i].lhs;
    const auto& b = sweep.points[i + 1].lhs;
    if (b.value > a.value + band(a, b)) sweep.monotone = false;
  }
  if (sweep.points.size() > 1 && last.lhs.value > 0.0 && first.lhs.value > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(sweep.points.size());
    for (const auto& p : sweep.points) {
      const double lx = std::log(p.eps), ly = std::log(std::max(p.lhs.value, 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    sweep.decay_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return sweep;
}

}  // namespace gausslab
