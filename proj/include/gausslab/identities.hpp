#pragma once

// Exact Gaussian integrals of quadratic forms <Lx, x> under N_Q and their
// Monte Carlo oracles. Everything is expressed through the eigenvalues beta_k
// of the symmetrized sandwich M_s = Q^{1/2} L_s Q^{1/2}, L_s = (L + L^T)/2.

#include <cstdint>

#include "gausslab/cylinder.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

class QuadraticForm {
 public:
  QuadraticForm(Matrix l, const Spectrum& spectrum);

  const Matrix& l() const noexcept { return l_; }
  const Matrix& m() const noexcept { return m_; }       // Q^{1/2} L Q^{1/2}
  const Matrix& ms() const noexcept { return ms_; }     // Q^{1/2} L_s Q^{1/2}
  const Vector& betas() const noexcept { return betas_; }
  const Vector& lambdas() const noexcept { return lambdas_; }
  bool symmetric() const;
  double trace_m() const { return m_.trace(); }
  /// Tr[M_s^k] from the eigenvalues.
  double trace_power(int k) const;

 private:
  Matrix l_, m_, ms_;
  Vector betas_, lambdas_;
};

/// E[exp(-eps <Lx,x>)] = det(1 + 2 eps M_s)^{-1/2}.
double exp_quadratic_integral(const QuadraticForm& qf, double eps);

/// S(eps) = det(1 + 2 eps M_s)^{-1/2} exp(eps Tr M_s).
double log_laplace_S(const QuadraticForm& qf, double eps);

/// kappa_m of <Lx,x> - Tr M: 0 for m = 1, 2^{m-1} (m-1)! Tr[M_s^m] for m >= 2.
double quadratic_cumulant(const QuadraticForm& qf, int m);

/// E[(<Lx,x> - Tr M)^m] from the cumulants by
/// mu_m = sum_{k=1}^{m} C(m-1, k-1) kappa_k mu_{m-k}; refused for m > 12.
double central_moment(const QuadraticForm& qf, int m);

/// Moments from arbitrary cumulants kappa[1..m] (kappa[0] unused).
double moment_from_cumulants(const std::vector<double>& kappa, int m);

/// Exact m-th central moment divided by Tr[M_s^m]. A single-trace law
/// moment = C_m Tr[M^m] would make this independent of the form; for m = 4
/// the moment is 48 Tr M^4 + 12 (Tr M^2)^2 and it is not.
double single_trace_ratio(const QuadraticForm& qf, int m);

/// Monte Carlo oracle of E[exp(-eps <Lx,x>)] computing <Lx,x> directly.
Estimate mc_exp_quadratic(const QuadraticForm& qf, double eps, std::size_t samples, std::uint64_t seed);

/// Monte Carlo oracle of E[(<Lx,x> - Tr M)^m].
Estimate mc_central_moment(const QuadraticForm& qf, int m, std::size_t samples, std::uint64_t seed);

struct DivergenceProbe {
  Estimate lhs;       // int |div_Q G|^p dmu
  Estimate rhs_core;  // int (||DG||_HS^2 + |Q^{-1/2} G|^p) dmu
  double ratio = 0.0;
};

DivergenceProbe divq_lp_probe(const CylinderVectorField& g, const Spectrum& spectrum, double p,
                              const SampleBatch& batch, double t = 0.0);

}  // namespace gausslab
