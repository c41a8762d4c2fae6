#include "gausslab/transport.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "gausslab/calculus.hpp"
#include "gausslab/catalog.hpp"
#include "gausslab/error.hpp"
#include "gausslab/parallel.hpp"
#include "gausslab/semigroup.hpp"

namespace gausslab {

namespace {

Eigen::Index ix(std::size_t n) { return static_cast<Eigen::Index>(n); }

void check_times(const std::vector<double>& times) {
  if (times.empty()) fail(ErrorKind::config, "empty time grid");
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i])) fail(ErrorKind::config, "time grid must be strictly increasing");
  }
}

// Three smooth oracle cases on a small reference spectrum; the third has a
// time-dependent source so the two time arguments differ.
struct OracleCase {
  const char* f;
  const char* field;
};
constexpr OracleCase kOracleCases[] = {
    {"const(c=1)", "const(k=1, c=1)"},
    {"coord(k=1)", "zero(n=1)"},
    {"sin(k=1, tpow=1)", "rotanh(a=0.5)"},
};

ConventionReport resolve() {
  const Spectrum spectrum = Spectrum::power_law(2.0, 4);
  const double horizon = 1.0;
  ODEOptions options;
  ConventionReport report;
  for (const auto& c : kOracleCases) report.cases.push_back(std::string(c.f) + " / " + c.field);
  for (double sign : {-1.0, 1.0}) {
    for (TimeArgument time : {TimeArgument::absolute, TimeArgument::shifted}) {
      ConventionCandidate candidate;
      candidate.convention = {sign, time};
      candidate.pass = true;
      for (const auto& c : kOracleCases) {
        const CylinderFunction f = make_function(c.f, horizon);
        const CylinderVectorField field = make_field(c.field, spectrum.dim(), horizon);
        const CylinderFunction u = backward_function(f, field, spectrum, options, candidate.convention);
        const ProbeGrid probes = transport_probes(spectrum, u.base_dim(), 16, horizon);
        const double r = pde_residual(numeric(u), field, f, probes).max;
        candidate.max_residual.push_back(r);
        if (!(r <= 1e-3)) candidate.pass = false;
      }
      report.candidates.push_back(candidate);
    }
  }
  std::size_t passing = 0;
  for (const auto& c : report.candidates) {
    if (c.pass) {
      report.chosen = c.convention;
      ++passing;
    }
  }
  if (passing != 1) {
    std::ostringstream msg;
    msg << passing << " of 4 backward-solution conventions pass the residual oracle:";
    for (const auto& c : report.candidates) {
      msg << " [" << c.convention.describe() << ":";
      for (double r : c.max_residual) msg << ' ' << r;
      msg << ']';
    }
    fail(ErrorKind::convention, msg.str());
  }
  return report;
}

}  // namespace

Vector flow(const CylinderVectorField& field, const Spectrum& spectrum, double t0, double t1, ConstVectorRef x,
            const ODEOptions& options) {
  const auto nf = ix(field.base_dim());
  if (x.size() < nf || field.base_dim() > spectrum.dim()) fail(ErrorKind::shape, "flow: point shorter than field base");
  Vector out = x;
  Vector state = x.head(nf);
  integrate([&](double s, const Vector& xi, Vector& dxi) { field.value(s, xi, dxi); }, state, t0, t1, options);
  out.head(nf) = state;
  return out;
}

std::string BackwardConvention::describe() const {
  std::ostringstream out;
  out << "u(t,x) = " << (sign < 0 ? "-" : "+") << "int_t^T f("
      << (time == TimeArgument::absolute ? "s" : "s-t") << ", xi(s,t,x)) ds";
  return out.str();
}

const ConventionReport& resolved_convention() {
  static std::once_flag once;
  static std::unique_ptr<ConventionReport> report;
  static std::exception_ptr error;
  std::call_once(once, [] {
    try {
      report = std::make_unique<ConventionReport>(resolve());
    } catch (...) {
      error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);
  return *report;
}

BackwardValue backward_solution(const CylinderFunction& f, const CylinderVectorField& field,
                                const Spectrum& spectrum, double t, ConstVectorRef x, const ODEOptions& options,
                                bool with_gradient, const BackwardConvention& convention) {
  const double horizon = f.horizon();
  if (!(t >= -1e-12 && t <= horizon + 1e-12)) fail(ErrorKind::domain, "backward solution needs t in [0, T]");
  const std::size_t n = std::max(f.base_dim(), field.base_dim());
  if (n > spectrum.dim() || x.size() < ix(n)) fail(ErrorKind::shape, "backward solution: point too short");
  if (with_gradient && !f.differentiable()) fail(ErrorKind::domain, "gradient of u needs differentiable f");
  const auto d = ix(n), nf = ix(field.base_dim()), nsrc = ix(f.base_dim());
  BackwardValue out;
  if (with_gradient) out.gradient = Vector::Zero(d);
  if (t >= horizon) return out;

  // state = [xi (d), I, J (d x d column-major), grad I (d)]
  const Eigen::Index size = with_gradient ? d + 1 + d * d + d : d + 1;
  Vector state = Vector::Zero(size);
  state.head(d) = x.head(d);
  if (with_gradient) Eigen::Map<Matrix>(state.data() + d + 1, d, d).setIdentity();
  const bool shifted = convention.time == TimeArgument::shifted;
  Vector g(nf), df(nsrc);
  Matrix jac(nf, nf);
  integrate(
      [&](double s, const Vector& y, Vector& dy) {
        dy.setZero(size);
        const Vector xi = y.head(d);
        const double ts = shifted ? s - t : s;
        field.value(s, xi, g);
        dy.head(nf) = g;
        dy[d] = f(ts, xi);
        if (!with_gradient) return;
        const Eigen::Map<const Matrix> j(y.data() + d + 1, d, d);
        field.jacobian(s, xi, jac);
        Eigen::Map<Matrix> dj(dy.data() + d + 1, d, d);
        dj.topRows(nf) = jac * j.topRows(nf);
        f.gradient(ts, xi, df);
        dy.tail(d) = j.topRows(nsrc).transpose() * df;
      },
      state, t, horizon, options);
  out.value = convention.sign * state[d];
  if (with_gradient) out.gradient = convention.sign * state.tail(d);
  return out;
}

BackwardValue backward_solution(const CylinderFunction& f, const CylinderVectorField& field,
                                const Spectrum& spectrum, double t, ConstVectorRef x, const ODEOptions& options,
                                bool with_gradient) {
  return backward_solution(f, field, spectrum, t, x, options, with_gradient, resolved_convention().chosen);
}

CylinderFunction backward_function(const CylinderFunction& f, const CylinderVectorField& field,
                                   const Spectrum& spectrum, const ODEOptions& options,
                                   const BackwardConvention& convention) {
  CylinderFunction::Parts p;
  p.base_dim = std::max(f.base_dim(), field.base_dim());
  p.value = [=](double t, ConstVectorRef x) {
    return backward_solution(f, field, spectrum, t, x, options, false, convention).value;
  };
  if (f.differentiable()) {
    p.gradient = [=](double t, ConstVectorRef x, VectorRef out) {
      out = backward_solution(f, field, spectrum, t, x, options, true, convention).gradient;
    };
  }
  p.bounded = f.bounded();
  p.terminal_zero = true;
  p.horizon = f.horizon();
  p.name = "u[" + f.name() + ";" + field.name() + "]";
  return CylinderFunction(std::move(p));
}

CylinderFunction backward_function(const CylinderFunction& f, const CylinderVectorField& field,
                                   const Spectrum& spectrum, const ODEOptions& options) {
  return backward_function(f, field, spectrum, options, resolved_convention().chosen);
}

ProbeGrid transport_probes(const Spectrum& spectrum, std::size_t dim, std::size_t count, double horizon,
                           double margin) {
  if (count == 0) fail(ErrorKind::config, "probe grid must be nonempty");
  if (!(horizon > 2.0 * margin)) fail(ErrorKind::config, "horizon too short for the probe margin");
  ProbeGrid grid;
  grid.points = probe_points(spectrum, dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    // Time from the next unused Halton base.
    const double h = halton(i + 1, dim + 1)[ix(dim)];
    grid.times.push_back(margin + (horizon - 2.0 * margin) * h);
  }
  return grid;
}

NumericFunction numeric(const CylinderFunction& u) {
  NumericFunction out;
  out.value = [u](double t, ConstVectorRef x) { return u(t, x); };
  if (u.differentiable()) out.gradient = [u](double t, ConstVectorRef x) { return u.gradient(t, x); };
  return out;
}

ResidualReport pde_residual(const NumericFunction& u, const CylinderVectorField& field, const CylinderFunction& f,
                            const ProbeGrid& probes, double h) {
  const std::size_t count = probes.size();
  std::vector<double> r(count, 0.0);
  const auto nf = ix(field.base_dim());
  parallel_for(count, [&](std::size_t i) {
    const double t = probes.times[i];
    Vector x = probes.points[i];
    if (x.size() < nf) {
      x.conservativeResize(nf);
      x.tail(nf - probes.points[i].size()).setZero();
    }
    const double dt = (u.value(t + h, x) - u.value(t - h, x)) / (2.0 * h);
    Vector du;
    if (u.gradient) {
      du = u.gradient(t, x);
    } else {
      du = Vector::Zero(nf);
      const double step = 1e-5;
      for (Eigen::Index k = 0; k < nf; ++k) {
        Vector xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        du[k] = (u.value(t, xp) - u.value(t, xm)) / (2.0 * step);
      }
    }
    const Vector g = field.value(t, x);
    const Eigen::Index common = std::min(nf, du.size());
    r[i] = std::abs(dt + g.head(common).dot(du.head(common)) - f(t, x));
  });
  ResidualReport report;
  report.count = count;
  for (double v : r) {
    report.max = std::max(report.max, v);
    report.mean += v / static_cast<double>(count);
  }
  return report;
}

MaxPrincipleReport max_principle_check(const NumericFunction& u, const CylinderFunction& f,
                                       const ProbeGrid& probes, double horizon) {
  if (probes.size() == 0) fail(ErrorKind::config, "probe grid must be nonempty");
  std::vector<double> mu(probes.size()), mf(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    mu[i] = std::abs(u.value(probes.times[i], probes.points[i]));
    mf[i] = std::abs(f(probes.times[i], probes.points[i]));
  });
  MaxPrincipleReport report;
  report.max_u = *std::max_element(mu.begin(), mu.end());
  report.max_f = *std::max_element(mf.begin(), mf.end());
  if (report.max_f > 0.0) {
    report.ratio = report.max_u / report.max_f;
    report.ratio_over_T = report.ratio / horizon;
  }
  report.pass = report.max_f > 0.0 ? report.ratio <= horizon * (1.0 + 1e-6) : report.max_u == 0.0;
  return report;
}

ParticleEnsemble sample_ensemble(const Spectrum& spectrum, std::size_t m, std::uint64_t seed, const Vector& shift) {
  SampleBatch batch = sample_gaussian(spectrum, m, seed);
  ParticleEnsemble zeta;
  zeta.positions = batch.data();
  zeta.seed = seed;
  zeta.law = "N_Q";
  if (shift.size() > 0) {
    if (shift.size() > zeta.positions.rows()) fail(ErrorKind::shape, "mean shift longer than the truncation");
    zeta.positions.topRows(shift.size()).colwise() += shift;
    zeta.law = "N_Q shifted";
  }
  return zeta;
}

Vector Trajectory::position(std::size_t i, std::size_t j, std::size_t d) const {
  Vector x = initial.col(ix(j)).head(ix(d));
  const auto k = std::min(ix(d), ix(moving_dims));
  if (k > 0) x.head(k) = moving[i].col(ix(j)).head(k);
  return x;
}

Trajectory push_forward(const ParticleEnsemble& zeta, const CylinderVectorField& field, const Spectrum& spectrum,
                        const std::vector<double>& times, const ODEOptions& options) {
  check_times(times);
  const std::size_t m = zeta.size();
  const auto nf = ix(field.base_dim());
  if (field.base_dim() > spectrum.dim() || zeta.positions.rows() < nf) fail(ErrorKind::shape, "pushforward: bad shapes");
  Trajectory traj;
  traj.times = times;
  traj.initial = zeta.positions;
  traj.moving_dims = field.base_dim();
  traj.moving.assign(times.size(), Matrix(nf, ix(m)));
  traj.moving[0] = zeta.positions.topRows(nf);
  parallel_for(m, [&](std::size_t j) {
    Vector state = zeta.positions.col(ix(j)).head(nf);
    try {
      for (std::size_t i = 1; i < times.size(); ++i) {
        integrate([&](double s, const Vector& xi, Vector& dxi) { field.value(s, xi, dxi); }, state, times[i - 1],
                  times[i], options);
        traj.moving[i].col(ix(j)) = state;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "particle " + std::to_string(j) + ": " + e.what());
    }
  });
  return traj;
}

Trajectory frozen_trajectory(const ParticleEnsemble& zeta, const std::vector<double>& times) {
  check_times(times);
  Trajectory traj;
  traj.times = times;
  traj.initial = zeta.positions;
  return traj;
}

WeakResidual weak_residual(const Trajectory& traj, const CylinderFunction& u, const CylinderVectorField& field) {
  if (!u.terminal_zero()) fail(ErrorKind::test_class, "'" + u.name() + "' is not in D_T (u(T) != 0)");
  if (!u.differentiable()) fail(ErrorKind::test_class, "'" + u.name() + "' is not differentiable");
  const std::size_t nt = traj.times.size();
  if (nt < 3 || nt % 2 == 0) fail(ErrorKind::config, "weak residual needs an odd number (>= 3) of time nodes");
  const std::vector<double> w = trapezoid_weights(traj.times);
  std::vector<double> coarse_times;
  for (std::size_t i = 0; i < nt; i += 2) coarse_times.push_back(traj.times[i]);
  const std::vector<double> wc = trapezoid_weights(coarse_times);
  const std::size_t d = std::max(u.base_dim(), field.base_dim());
  if (static_cast<std::size_t>(traj.initial.rows()) < d) fail(ErrorKind::shape, "trajectory shorter than the test base");
  const auto nu = ix(u.base_dim()), nf = ix(field.base_dim());
  const auto common = std::min(nu, nf);
  const std::size_t m = traj.size();
  Vector fine(ix(m)), coarse(ix(m)), scale(ix(m));
  parallel_for(m, [&](std::size_t j) {
    double acc = 0.0, accc = 0.0, mag = 0.0;
    Vector du(nu), g(nf);
    for (std::size_t i = 0; i < nt; ++i) {
      const double t = traj.times[i];
      const Vector x = traj.position(i, j, d);
      u.gradient(t, x, du);
      field.value(t, x, g);
      const double k = u.time_derivative(t, x) + g.head(common).dot(du.head(common));
      acc += w[i] * k;
      mag += w[i] * std::abs(k);
      if (i % 2 == 0) accc += wc[i / 2] * k;
    }
    const double start = u(traj.times[0], traj.position(0, j, d));
    fine[ix(j)] = acc + start;
    coarse[ix(j)] = accc + start;
    scale[ix(j)] = mag + std::abs(start);
  });
  WeakResidual out;
  const double mean = fine.mean();
  const double var = m > 1 ? (fine.array() - mean).square().sum() / static_cast<double>(m - 1) : 0.0;
  out.value = {mean, std::sqrt(var / static_cast<double>(m))};
  // an exact zero (e.g. u independent of the moving coordinates) would
  // otherwise make rounding noise look like a detection
  out.quadrature_bound = std::abs(mean - coarse.mean()) + 1e3 * DBL_EPSILON * scale.mean();
  const double band = out.value.std_error + out.quadrature_bound;
  out.pass = std::abs(mean) <= 3.0 * band;
  out.detected = std::abs(mean) > 5.0 * band;
  return out;
}

RangeProbe range_probe(const CylinderFunction& f, const CylinderVectorField& field, const Spectrum& spectrum,
                       double eps, std::size_t approx_dim, const SampleBatch& batch, const ExponentTriple& exponents,
                       const RangeOptions& options) {
  if (!(eps > 0.0)) fail(ErrorKind::domain, "range probe needs eps > 0");
  if (!f.terminal_zero()) fail(ErrorKind::test_class, "range probe source '" + f.name() + "' is not in D_T");
  const double horizon = f.horizon();
  const std::vector<double> grid = options.time_grid.empty() ? uniform_grid(horizon, 5) : options.time_grid;
  const std::vector<double> tw = trapezoid_weights(grid);
  const std::size_t draws = std::min(options.projection_draws, batch.size());
  const SampleBatch projection_batch(batch.spectrum(), batch.seed(), batch.data().leftCols(ix(draws)));
  const CylinderVectorField fn = project_smooth(field, approx_dim, spectrum, projection_batch);
  const CylinderFunction un = backward_function(f, fn, spectrum, options.ode);
  const auto du_dim = ix(un.base_dim());
  const auto nfn = ix(fn.base_dim()), nfull = ix(field.base_dim());
  const Vector lambdas = spectrum.eigenvalues().head(du_dim);
  const OUOperators ops = ou_operators(spectrum.leading(un.base_dim()), eps);
  const double pp = exponents.p_prime();
  const std::size_t m = std::min(options.outer_samples, batch.size());
  const std::size_t width = 2 + static_cast<std::size_t>(du_dim);

  Matrix powered(4, ix(m));
  std::vector<double> inner_err(m, 0.0);
  parallel_for(m, [&](std::size_t j) {
    const Vector xfull = batch.sample(j);
    const Vector xa = xfull.head(du_dim);
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      const MultiEstimate est = gaussian_expectation(
          lambdas, width,
          [&](ConstVectorRef y, VectorRef out) {
            const Vector z = ops.tau.cwiseProduct(xa) + ops.sigma.cwiseProduct(y);
            const BackwardValue b = backward_solution(f, fn, spectrum, t, z, options.ode, true);
            const Vector g = fn.value(t, z);
            out[0] = f(t, z);
            out.segment(1, du_dim) = ops.tau.cwiseProduct(b.gradient);
            out[ix(width) - 1] = g.dot(b.gradient.head(nfn));
          },
          reseeded(options.inner, j * grid.size() + i));
      const Vector dpu = est.mean.segment(1, du_dim);
      const double smoothing = est.mean[0] - f(t, xfull);
      const Vector gx = field.value(t, xfull);
      const Vector gnx = fn.value(t, xfull);
      double projection = 0.0;
      for (Eigen::Index k = 0; k < std::min(nfull, du_dim); ++k) {
        projection += (gx[k] - (k < nfn ? gnx[k] : 0.0)) * dpu[k];
      }
      const double commutator = gnx.dot(dpu.head(nfn)) - est.mean[ix(width) - 1];
      const double total = smoothing + projection + commutator;
      acc += tw[i] * Eigen::Vector4d(std::pow(std::abs(smoothing), pp), std::pow(std::abs(projection), pp),
                                     std::pow(std::abs(commutator), pp), std::pow(std::abs(total), pp));
      inner_err[j] = std::max(inner_err[j], est.cov.diagonal().cwiseMax(0.0).cwiseSqrt().maxCoeff());
    }
    powered.col(ix(j)) = acc;
  });
  RangeProbe out;
  out.eps = eps;
  out.approx_dim = approx_dim;
  out.smoothing = norm_from_samples(powered.row(0).transpose(), pp);
  out.projection = norm_from_samples(powered.row(1).transpose(), pp);
  out.commutator = norm_from_samples(powered.row(2).transpose(), pp);
  out.total = norm_from_samples(powered.row(3).transpose(), pp);
  out.total_samples = powered.row(3).transpose();
  out.inner_error = *std::max_element(inner_err.begin(), inner_err.end());
  return out;
}

}  // namespace gausslab
