#pragma once

// The commutator
//   B_eps(u,F)(t,x) = <F(t,x), DP_eps u(t,.)(x)> - P_eps(<F(t,.), Du(t,.)>)(x),
// its representation B1 + B2 through the Q-divergence, the further split of
// B2 along the rotation path x_xi = T_{eps xi} x + S_{eps xi} y, and L^p'
// sweeps over eps.
//
// Along the path, per mode, d x_xi/d xi = (eps/2) lambda^-1 (T/S)_{eps xi} y_xi
// and d y_xi/d xi = -(eps/2) lambda^-1 (T/S)_{eps xi} x_xi. With
// a = lambda^-1 T_eps/S_eps, b = lambda^-1 T_{eps xi}/S_{eps xi} and
// G = Q a b F this gives
//   B21 = -(eps/2) E int_0^1 [<a DF(x_xi) b y_xi, y_xi> - Tr DG(x_xi)] u(x_1) dxi
//   B22 = -(eps/2) E int_0^1 div_Q G(x_xi) u(x_1) dxi.
// The xi-integrand behaves like xi^{-1/2} at 0; the substitution xi = w^2
// removes it and w is integrated by Gauss-Legendre.

#include <string>
#include <vector>

#include "gausslab/cylinder.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

struct ExponentTriple {
  double p = 4.0;
  double r = 4.0;
  double s = 2.0;

  /// Validates p > 2, r >= 1, s in (1, 2] and 1/p' = 1/r + 1/s.
  static ExponentTriple make(double p, double r, double s);

  double p_prime() const { return p / (p - 1.0); }
  /// s > p', the range used for the uniqueness theorem.
  bool theorem_range() const { return s > p_prime(); }
};

struct CommutatorOptions {
  std::size_t xi_nodes = 33;
  bool split = true;
};

/// All pieces at one (t, x) from common draws. Components of `est`:
/// direct, B1, B2, B21, B22.
struct CommutatorBreakdown {
  MultiEstimate est;
  double xi_error_b21 = 0.0;  // |fine - coarse| of the w-rule
  double xi_error_b22 = 0.0;
  bool accuracy_flag = false;  // SE of the direct form above 10% of its scale

  Estimate direct() const { return est.component(0); }
  Estimate b1() const { return est.component(1); }
  Estimate b2() const { return est.component(2); }
  Estimate b21() const { return est.component(3); }
  Estimate b22() const { return est.component(4); }
  /// direct - (B1 + B2), paired standard error.
  Estimate representation_gap() const;
  /// B2 - (B21 + B22), paired standard error (w-rule error not included).
  Estimate split_gap() const;
  double xi_error() const { return xi_error_b21 + xi_error_b22; }
};

CommutatorBreakdown commutator_breakdown(const CylinderFunction& u, const CylinderVectorField& f,
                                         const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                         const QuadratureSpec& q, const CommutatorOptions& options = {});

struct CommutatorValue {
  Estimate value;
  bool accuracy_flag = false;
};

CommutatorValue commutator_direct(const CylinderFunction& u, const CylinderVectorField& f,
                                  const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                  const QuadratureSpec& q);

struct CommutatorRep {
  Estimate b1, b2, sum;
};

CommutatorRep commutator_rep(const CylinderFunction& u, const CylinderVectorField& f, const Spectrum& spectrum,
                             double eps, double t, ConstVectorRef x, const QuadratureSpec& q);

struct CommutatorSplit {
  Estimate b21, b22, sum;
  double xi_error = 0.0;
};

CommutatorSplit commutator_b2_split(const CylinderFunction& u, const CylinderVectorField& f,
                                    const Spectrum& spectrum, double eps, double t, ConstVectorRef x,
                                    const QuadratureSpec& q, std::size_t xi_nodes = 33);

/// 2 alpha e^{-alpha eps} e^{-alpha eps xi} / (sqrt(1-e^{-2 alpha eps}) sqrt(1-e^{-2 alpha eps xi})).
double operator_bound_mode(double alpha, double eps, double xi);

struct OperatorBound {
  double sup_value = 0.0;  // max over modes of the closed form
  double scan_value = 0.0; // max over modes of lambda^-1 (tau/sigma)(eps) (tau/sigma)(eps xi)
  std::size_t argmax = 0;  // 0-based mode index
  double scaled = 0.0;     // sup_value * eps * sqrt(xi)
  double bound_rhs = 0.0;  // C / (eps sqrt(xi))
  bool pass = false;
};

OperatorBound operator_bound_check(const Spectrum& spectrum, double eps, double xi, double constant);

struct SweepPoint {
  double eps = 0.0;
  Estimate lhs;               // ||B_eps||_{L^p'(dt x mu)}
  Estimate b1, b2, b21, b22;  // norms of the pieces on the decomposition subset
  double inner_error = 0.0;   // largest inner quadrature SE met
  double ratio = 0.0;         // lhs / rhs_core
  double bound = 0.0;         // C * rhs_core
  bool pass = false;
};

struct CommutatorSweep {
  std::string u_name, f_name;
  ExponentTriple exponents;
  std::vector<SweepPoint> points;
  Estimate u_norm;         // ||u||_{L^r}
  Estimate f_sobolev;      // ||F||_{1,s,T}
  Estimate f_qhalf;        // ||Q^{-1/2} F||_{L^s}
  Estimate f_schatten;     // (int int sum sigma_i(DF)^s)^{1/s}
  double rhs_core = 0.0;   // u_norm * (f_sobolev + f_qhalf)
  double constant = 0.0;
  bool bound_pass = false;
  bool endpoint_decrease = false;  // lhs(min eps) < lhs(max eps) beyond 3 combined SE
  bool monotone = false;           // consecutive values non-increasing within 3 combined SE
  double decay_slope = 0.0;        // log-log slope of lhs against eps
};

struct SweepOptions {
  QuadratureSpec inner = GaussHermite{8, 6, 256, 1};
  std::size_t decomposition_samples = 24;
  std::size_t xi_nodes = 33;
  double constant = 1.0;
};

/// eps grid must be positive; it is processed in decreasing order.
CommutatorSweep norm_sweep(const CylinderFunction& u, const CylinderVectorField& f, const Spectrum& spectrum,
                           const ExponentTriple& exponents, std::vector<double> eps_grid,
                           const SampleBatch& batch, const std::vector<double>& time_grid,
                           const SweepOptions& options);

}  // namespace gausslab
