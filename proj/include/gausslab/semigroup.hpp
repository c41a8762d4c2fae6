#pragma once

// The OU semigroup P_eps through the Mehler formula
//   P_eps u(x) = E[u(T_eps x + S_eps y)],  y ~ N_Q,
// and through the density form E_{y ~ N_Q}[u(y) rho(eps, x, y)]. Only the
// modes a test function is based on enter; the other modes integrate out
// exactly (the kernel factorizes over modes and each factor has unit mass).

#include <string>
#include <vector>

#include "gausslab/cylinder.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

/// Active modes of u, as a leading sub-spectrum.
Vector active_lambdas(const Spectrum& spectrum, std::size_t base_dim);

Estimate mehler_apply(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                      ConstVectorRef x, const QuadratureSpec& q);

Estimate density_apply(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                       ConstVectorRef x, const QuadratureSpec& q);

/// log rho(eps, x, y) over the first x.size() modes (x and y of equal size).
double density_log_rho(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);
double density_rho(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);

/// Q_eps^{-1} T_eps (y - T_eps x) = D_x log rho.
Vector density_grad_x(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);
/// Q_eps^{-1} T_eps (x - T_eps y) = D_y log rho.
Vector density_grad_y(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);

/// D_x rho and D_y rho (the log-gradients times rho).
Vector density_full_grad_x(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);
Vector density_full_grad_y(const Spectrum& spectrum, double eps, ConstVectorRef x, ConstVectorRef y);

enum class GradientForm {
  smooth,  // T_eps E[Du(T_eps x + S_eps y)], needs u in C^1
  weight,  // E[u(T_eps x + S_eps y) Q_eps^{-1} T_eps S_eps y], u bounded measurable
};

struct GradientEstimate {
  Vector value;      // DP_eps u(x) on the base coordinates of u
  Vector std_error;  // per component
};

/// DP_eps u(t, .)(x). The weight form throws an accuracy error when the
/// standard error exceeds 10% of the gradient norm.
GradientEstimate grad_mehler(const CylinderFunction& u, const Spectrum& spectrum, double eps, double t,
                             ConstVectorRef x, const QuadratureSpec& q, GradientForm form);

/// Same as grad_mehler without the accuracy check.
GradientEstimate grad_mehler_unchecked(const CylinderFunction& u, const Spectrum& spectrum, double eps,
                                       double t, ConstVectorRef x, const QuadratureSpec& q,
                                       GradientForm form);

/// 255 Halton points in the d-ball of radius 3 sqrt(lambda_1) plus the
/// origin: the proxy on which sup norms are taken.
std::vector<Vector> probe_points(const Spectrum& spectrum, std::size_t d, std::size_t count = 256);

/// k-th point of the Halton sequence in [0,1)^d (k >= 1).
Vector halton(std::size_t k, std::size_t d);

struct SmoothingProbe {
  std::vector<double> eps;
  std::vector<double> sup_gradient;  // max over probes of |DP_eps u|
  std::vector<double> std_error;     // at the maximizing probe
  double sup_u = 0.0;                // max over probes of |u|
  double slope = 0.0;                // least-squares log-log slope
  double constant = 0.0;             // exp(intercept) of the fit
  double half_constant = 0.0;        // max_eps sup |DP_eps u| sqrt(eps) / sup |u|
  bool degenerate = false;
  std::string warning;
};

/// Sup over probe points of |DP_eps u(t, .)| for each eps of the grid and the
/// fitted power law. Uses the smooth form when u is differentiable.
SmoothingProbe smoothing_probe(const CylinderFunction& u, const Spectrum& spectrum,
                               const std::vector<double>& eps_grid, const QuadratureSpec& q,
                               double t = 0.0);

}  // namespace gausslab
