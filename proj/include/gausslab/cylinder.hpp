#pragma once

// Finitely based (cylinder) test functions u(t, x) = u_N(t, x_1..x_N) and
// vector fields F(t, x) = sum_{i<=N} g_i(t, x_1..x_N) e_i. Derivatives are
// hand-derived closures; finite differences are used only as test oracles.
//
// Points are passed as the full coordinate vector (or any prefix of length
// >= base_dim); only the first base_dim entries are read.

#include <functional>
#include <string>

#include "gausslab/types.hpp"

namespace gausslab {

using ScalarFn = std::function<double(double, ConstVectorRef)>;
using GradientFn = std::function<void(double, ConstVectorRef, VectorRef)>;
using FieldFn = std::function<void(double, ConstVectorRef, VectorRef)>;
using JacobianFn = std::function<void(double, ConstVectorRef, MatrixRef)>;

class CylinderFunction {
 public:
  struct Parts {
    std::size_t base_dim = 1;
    ScalarFn value;
    GradientFn gradient;         // empty when not differentiable in x
    ScalarFn time_derivative;    // empty means identically zero
    bool bounded = true;
    bool terminal_zero = false;  // u(T, .) == 0, i.e. u belongs to D_T
    double horizon = 1.0;
    std::string name;
  };

  explicit CylinderFunction(Parts parts);

  std::size_t base_dim() const noexcept { return parts_.base_dim; }
  double horizon() const noexcept { return parts_.horizon; }
  bool bounded() const noexcept { return parts_.bounded; }
  bool terminal_zero() const noexcept { return parts_.terminal_zero; }
  bool differentiable() const noexcept { return static_cast<bool>(parts_.gradient); }
  const std::string& name() const noexcept { return parts_.name; }
  const Parts& parts() const noexcept { return parts_; }

  double operator()(double t, ConstVectorRef x) const { return parts_.value(t, x); }

  /// Writes the base_dim gradient into out.
  void gradient(double t, ConstVectorRef x, VectorRef out) const;
  Vector gradient(double t, ConstVectorRef x) const;

  double time_derivative(double t, ConstVectorRef x) const;

 private:
  Parts parts_;
};

class CylinderVectorField {
 public:
  struct Parts {
    std::size_t base_dim = 1;
    FieldFn value;        // writes g_1..g_N
    JacobianFn jacobian;  // writes the N x N block d g_i / d x_j
    bool bounded = true;
    bool compact_support = false;
    std::string name;
  };

  explicit CylinderVectorField(Parts parts);

  std::size_t base_dim() const noexcept { return parts_.base_dim; }
  bool bounded() const noexcept { return parts_.bounded; }
  bool compact_support() const noexcept { return parts_.compact_support; }
  const std::string& name() const noexcept { return parts_.name; }

  void value(double t, ConstVectorRef x, VectorRef out) const { parts_.value(t, x, out); }
  Vector value(double t, ConstVectorRef x) const;

  void jacobian(double t, ConstVectorRef x, MatrixRef out) const { parts_.jacobian(t, x, out); }
  Matrix jacobian(double t, ConstVectorRef x) const;

  /// F(t, x) embedded in R^n (zero beyond the base coordinates).
  Vector full_value(double t, ConstVectorRef x, std::size_t n) const;

  /// DF(t, x) embedded as an n x n matrix (zero outside the N x N block).
  Matrix full_jacobian(double t, ConstVectorRef x, std::size_t n) const;

 private:
  Parts parts_;
};

// Combinators. Results are based on the larger of the operands' bases.

CylinderFunction operator+(const CylinderFunction& a, const CylinderFunction& b);
CylinderFunction operator*(double c, const CylinderFunction& u);

/// (T - t)^power * u(t, x): an element of D_T for any bounded C^1 u.
CylinderFunction vanish_at_horizon(const CylinderFunction& u, double horizon, double power = 1.0);

CylinderVectorField operator+(const CylinderVectorField& a, const CylinderVectorField& b);
CylinderVectorField operator*(double c, const CylinderVectorField& f);

/// x -> A F(t, x) for a square matrix A acting on the base coordinates.
CylinderVectorField transform(const Matrix& a, const CylinderVectorField& f);

/// (1 + amplitude sin(2 pi t / period)) F(t, x).
CylinderVectorField time_modulated(const CylinderVectorField& f, double amplitude, double period);

}  // namespace gausslab
