#pragma once

// Constants the estimates assert existence of but do not quantify. Each was
// set once as 1.1 x the largest observed ratio on the reference spectrum
// (lambda_k = k^-2, n = 64) by tools/calibrate.cpp (seed 7, its own
// catalog), rounded up to three digits, and is frozen here.

namespace gausslab::calibration {

/// sup_k ||Q^{-1} T_eps/S_eps T_{eps xi}/S_{eps xi}|| <= C / (eps sqrt(xi)).
inline constexpr double kOperatorBound = 1.10;  // observed 0.999975

/// ||B_eps(u,F)||_{L^p'} <= C ||u||_{L^r} (||F||_{1,s,T} + ||Q^{-1/2}F||_{L^s}).
inline constexpr double kCommutatorBound = 0.201;  // observed 0.182176

/// int |div_Q G|^p <= C_p int (||DG||_HS^2 + |Q^{-1/2}G|^p), p = 1.5, 2, 3.
inline constexpr double kDivergenceBound15 = 0.925;  // observed 0.840723
inline constexpr double kDivergenceBound2 = 1.11;  // observed 1.00009
inline constexpr double kDivergenceBound3 = 3.34;  // observed 3.03199

}  // namespace gausslab::calibration
