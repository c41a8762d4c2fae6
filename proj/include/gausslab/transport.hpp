#pragma once

// Characteristics of a drift F, the backward transport equation
//   d_t u + <F, Du> = f,  u(T) = 0,
// solved along them, particle pushforwards of an initial law, and the weak
// form of the continuity equation tested against D_T.

#include <cstdint>
#include <string>
#include <vector>

#include "gausslab/commutator.hpp"
#include "gausslab/cylinder.hpp"
#include "gausslab/ode.hpp"
#include "gausslab/quadrature.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

/// xi(t1; t0, x): the characteristic through x at time t0, evaluated at t1.
/// Only the base coordinates of F move; the rest of x is returned unchanged.
Vector flow(const CylinderVectorField& f, const Spectrum& spectrum, double t0, double t1, ConstVectorRef x,
            const ODEOptions& options);

enum class TimeArgument {
  absolute,  // f(s, xi(s,t,x))
  shifted,   // f(s - t, xi(s,t,x))
};

/// u(t,x) = sign * int_t^T f(time(s), xi(s,t,x)) ds.
struct BackwardConvention {
  double sign = -1.0;
  TimeArgument time = TimeArgument::absolute;

  std::string describe() const;
};

struct ConventionCandidate {
  BackwardConvention convention;
  std::vector<double> max_residual;  // one per oracle case
  bool pass = false;
};

struct ConventionReport {
  BackwardConvention chosen;
  std::vector<std::string> cases;
  std::vector<ConventionCandidate> candidates;
};

/// The convention fixed by the residual oracle: among the four candidates,
/// the unique one whose PDE residual stays below 1e-3 on three catalog cases.
/// Computed on first use and cached; throws a convention error when no or
/// several candidates pass.
const ConventionReport& resolved_convention();

struct BackwardValue {
  double value = 0.0;
  Vector gradient;  // Du(t,x) on max(N_F, N_f) coordinates, when requested
};

/// The horizon T is taken from f. The gradient comes from the variational
/// equation J' = DF(s, xi) J integrated alongside the characteristic.
BackwardValue backward_solution(const CylinderFunction& f, const CylinderVectorField& field,
                                const Spectrum& spectrum, double t, ConstVectorRef x, const ODEOptions& options,
                                bool with_gradient, const BackwardConvention& convention);

BackwardValue backward_solution(const CylinderFunction& f, const CylinderVectorField& field,
                                const Spectrum& spectrum, double t, ConstVectorRef x,
                                const ODEOptions& options, bool with_gradient = false);

/// The backward solution packaged as a cylinder function in D_T.
CylinderFunction backward_function(const CylinderFunction& f, const CylinderVectorField& field,
                                   const Spectrum& spectrum, const ODEOptions& options,
                                   const BackwardConvention& convention);
CylinderFunction backward_function(const CylinderFunction& f, const CylinderVectorField& field,
                                   const Spectrum& spectrum, const ODEOptions& options);

/// Paired probes (t_i, x_i): Halton times in [margin, T - margin] and the
/// ball probe points of the semigroup module.
struct ProbeGrid {
  std::vector<double> times;
  std::vector<Vector> points;
  std::size_t size() const { return times.size(); }
};

ProbeGrid transport_probes(const Spectrum& spectrum, std::size_t dim, std::size_t count, double horizon,
                           double margin = 1e-4);

/// A function known only numerically; gradient may be empty.
struct NumericFunction {
  std::function<double(double, ConstVectorRef)> value;
  std::function<Vector(double, ConstVectorRef)> gradient;
};

NumericFunction numeric(const CylinderFunction& u);

struct ResidualReport {
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// |d_t u + <F, Du> - f| on the probes; d_t by central differences with step
/// h, Du analytic when available, else central differences with step 1e-5.
ResidualReport pde_residual(const NumericFunction& u, const CylinderVectorField& field, const CylinderFunction& f,
                            const ProbeGrid& probes, double h = 1e-4);

struct MaxPrincipleReport {
  double max_u = 0.0;
  double max_f = 0.0;
  double ratio = 0.0;           // max|u| / max|f|, the unnormalized reading
  double ratio_over_T = 0.0;    // max|u| / (T max|f|)
  bool pass = false;            // ratio <= T (1 + 1e-6)
};

MaxPrincipleReport max_principle_check(const NumericFunction& u, const CylinderFunction& f,
                                       const ProbeGrid& probes, double horizon);

struct ParticleEnsemble {
  Matrix positions;  // n x m, uniform weights 1/m
  std::uint64_t seed = 0;
  std::string law;

  std::size_t size() const { return static_cast<std::size_t>(positions.cols()); }
};

/// m draws of N_Q, shifted by `shift` on its leading coordinates.
ParticleEnsemble sample_ensemble(const Spectrum& spectrum, std::size_t m, std::uint64_t seed,
                                 const Vector& shift = Vector());

/// Positions along a time grid. Only the coordinates moved by the drift are
/// stored per time; the others keep their initial values.
struct Trajectory {
  std::vector<double> times;
  Matrix initial;
  std::size_t moving_dims = 0;
  std::vector<Matrix> moving;  // per time, moving_dims x m

  std::size_t size() const { return static_cast<std::size_t>(initial.cols()); }
  /// First d coordinates of particle j at time index i.
  Vector position(std::size_t i, std::size_t j, std::size_t d) const;
};

Trajectory push_forward(const ParticleEnsemble& zeta, const CylinderVectorField& field, const Spectrum& spectrum,
                        const std::vector<double>& times, const ODEOptions& options);

/// Particles that never move: a non-solution for the meter's negative control.
Trajectory frozen_trajectory(const ParticleEnsemble& zeta, const std::vector<double>& times);

struct WeakResidual {
  Estimate value;               // int int (d_t u + <F,Du>) dmu_s ds + int u(0) dzeta
  double quadrature_bound = 0.0; // |R_h - R_2h| of the trapezoid rule plus a round-off floor
  bool pass = false;             // |value| <= 3 (SE + bound)
  bool detected = false;         // |value| > 5 (SE + bound)
};

/// Needs u in D_T (terminal zero) and an odd number of time nodes.
WeakResidual weak_residual(const Trajectory& trajectory, const CylinderFunction& u, const CylinderVectorField& field);

struct RangeOptions {
  QuadratureSpec inner = GaussHermite{6, 6, 64, 1};
  std::vector<double> time_grid;  // default: 5 uniform nodes on [0, T]
  ODEOptions ode;
  std::size_t outer_samples = 128;
  std::size_t projection_draws = 64;
};

/// Decomposition K_F(P_eps u_n) - f = (P_eps f - f) + <F - F_n, DP_eps u_n>
/// + B_eps(u_n, F_n) with F_n the smoothing projection of F and u_n the
/// backward solution under F_n. Norms are in L^p'(dt x mu).
struct RangeProbe {
  double eps = 0.0;
  std::size_t approx_dim = 0;
  Estimate smoothing;   // ||P_eps f - f||
  Estimate projection;  // ||<F - F_n, DP_eps u_n>||
  Estimate commutator;  // ||B_eps(u_n, F_n)||
  Estimate total;       // ||K_F(P_eps u_n) - f||
  double inner_error = 0.0;
  Vector total_samples; // per-sample |total|^p' sums, for paired comparisons
};

RangeProbe range_probe(const CylinderFunction& f, const CylinderVectorField& field, const Spectrum& spectrum,
                       double eps, std::size_t approx_dim, const SampleBatch& batch, const ExponentTriple& exponents,
                       const RangeOptions& options);

}  // namespace gausslab
