#include "gausslab/ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "gausslab/error.hpp"

namespace gausslab {

namespace odeint = boost::numeric::odeint;

void ODEOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) fail(ErrorKind::config, "ODE tolerances must be positive");
  if (!(max_step > 0.0) || !(min_step > 0.0) || min_step >= max_step) {
    fail(ErrorKind::config, "ODE step bounds must satisfy 0 < min_step < max_step");
  }
  if (max_steps == 0) fail(ErrorKind::config, "ODE step budget must be positive");
}

void integrate(const OdeRhs& rhs, Vector& state, double t0, double t1, const ODEOptions& options) {
  options.validate();
  const double length = std::abs(t1 - t0);
  if (length == 0.0) return;
  const double direction = t1 > t0 ? 1.0 : -1.0;
  const auto n = state.size();

  using State = std::vector<double>;
  State x(state.data(), state.data() + n);
  Vector xs(n), dxs(n);
  // Integrate in tau = |s - t0| so the stepper always moves forward.
  auto system = [&](const State& y, State& dydt, double tau) {
    xs = Eigen::Map<const Vector>(y.data(), n);
    rhs(t0 + direction * tau, xs, dxs);
    dydt.resize(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) dydt[static_cast<std::size_t>(k)] = direction * dxs[k];
  };
  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());

  double tau = 0.0;
  double dt = std::min(options.max_step, length);
  std::size_t steps = 0;
  const double end_slack = 1e-14 * std::max(1.0, length);
  while (length - tau > end_slack) {
    if (++steps > options.max_steps) {
      std::ostringstream msg;
      msg << "ODE step budget exhausted at s = " << t0 + direction * tau;
      fail(ErrorKind::stiffness, msg.str());
    }
    dt = std::min({dt, options.max_step, length - tau});
    if (stepper.try_step(system, x, tau, dt) == odeint::fail) {
      if (dt < options.min_step) {
        std::ostringstream msg;
        msg << "step size collapsed to " << dt << " at s = " << t0 + direction * tau;
        fail(ErrorKind::stiffness, msg.str());
      }
      continue;
    }
    if (!std::isfinite(x.front())) fail(ErrorKind::stiffness, "ODE solution left the finite range");
  }
  state = Eigen::Map<const Vector>(x.data(), n);
}

}  // namespace gausslab
