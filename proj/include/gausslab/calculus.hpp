#pragma once

// Gaussian Sobolev calculus on cylinder fields: the Q-divergence, space-time
// L^s norms against dt x N_Q, and the conditional-expectation smoothing that
// maps a field onto finitely many coordinates.

#include <functional>
#include <vector>

#include "gausslab/cylinder.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

/// Tr[DF(t,x)] - sum_k x_k g_k(t,x) / lambda_k.
double div_q(const CylinderVectorField& f, const Spectrum& spectrum, double t, ConstVectorRef x);

/// `nodes` equally spaced points on [0, T].
std::vector<double> uniform_grid(double horizon, std::size_t nodes);

/// Trapezoid weights of a sorted grid; throws a config error if empty.
std::vector<double> trapezoid_weights(const std::vector<double>& grid);

/// (int_0^T int |g|^s dmu dt)^(1/s) given the pointwise integrand |g|^s.
/// Each sample contributes its trapezoid sum; the standard error of the
/// mean is carried to the root by the delta method.
Estimate space_time_norm(const std::function<double(double, ConstVectorRef)>& powered, double s,
                         const SampleBatch& batch, const std::vector<double>& grid);

/// (mean h)^(1/s) from per-sample space-time sums h_j of |g|^s, with the
/// delta-method standard error.
Estimate norm_from_samples(const Vector& h, double s);

/// Difference of two such norms computed on the same samples, with the
/// standard error of the paired difference.
Estimate norm_difference(const Vector& ha, const Vector& hb, double s);

/// (int int (||DF||_HS^s + |F|^s))^(1/s).
Estimate sobolev_norm(const CylinderVectorField& f, double s, const Spectrum& spectrum,
                      const SampleBatch& batch, const std::vector<double>& grid);

/// (int int |Q^{-1/2} F|^s)^(1/s).
Estimate qhalf_inverse_norm(const CylinderVectorField& f, double s, const Spectrum& spectrum,
                            const SampleBatch& batch, const std::vector<double>& grid);

/// (int int sum_i sigma_i(DF)^s)^(1/s): the Schatten reading of Tr[(DF)^s].
Estimate schatten_trace_norm(const CylinderVectorField& f, double s, const SampleBatch& batch,
                             const std::vector<double>& grid);

/// (int int |u|^r)^(1/r).
Estimate function_norm(const CylinderFunction& u, double r, const SampleBatch& batch,
                       const std::vector<double>& grid);

/// Sum of the s-th powers of the singular values of a square matrix.
double schatten_power(const Matrix& a, double s);

/// G_N'(x) = int F(pi x + (1 - pi) y) mu(dy), averaged over the batch draws
/// for the coordinates beyond N', then truncated to its first N' components.
/// A field already based on the first N' coordinates is returned unchanged.
CylinderVectorField project_smooth(const CylinderVectorField& f, std::size_t target_dim,
                                   const Spectrum& spectrum, const SampleBatch& batch);

}  // namespace gausslab
