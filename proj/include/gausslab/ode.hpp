#pragma once

// Adaptive integration of x' = rhs(s, x) with the embedded Dormand-Prince
// 5(4) pair from Boost.Odeint, driven step by step so that step-size
// collapse is reported instead of looping.

#include <functional>

#include "gausslab/types.hpp"

namespace gausslab {

struct ODEOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.05;
  double min_step = 1e-12;
  std::size_t max_steps = 200000;

  void validate() const;
};

using OdeRhs = std::function<void(double s, const Vector& state, Vector& derivative)>;

/// Integrates `state` from s = t0 to s = t1 (t1 < t0 allowed). Throws a
/// stiffness error if the accepted step falls below min_step or the step
/// budget is exhausted.
void integrate(const OdeRhs& rhs, Vector& state, double t0, double t1, const ODEOptions& options);

}  // namespace gausslab
