#include "gausslab/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gausslab/error.hpp"

namespace gausslab {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

CylinderFunction::CylinderFunction(Parts parts) : parts_(std::move(parts)) {
  if (parts_.base_dim == 0) fail(ErrorKind::shape, "cylinder function needs base dimension >= 1");
  if (!parts_.value) fail(ErrorKind::shape, "cylinder function without a value closure");
}

void CylinderFunction::gradient(double t, ConstVectorRef x, VectorRef out) const {
  if (!parts_.gradient) fail(ErrorKind::domain, "function '" + parts_.name + "' is not differentiable");
  parts_.gradient(t, x, out);
}

Vector CylinderFunction::gradient(double t, ConstVectorRef x) const {
  Vector g(idx(parts_.base_dim));
  gradient(t, x, g);
  return g;
}

double CylinderFunction::time_derivative(double t, ConstVectorRef x) const {
  return parts_.time_derivative ? parts_.time_derivative(t, x) : 0.0;
}

CylinderVectorField::CylinderVectorField(Parts parts) : parts_(std::move(parts)) {
  if (parts_.base_dim == 0) fail(ErrorKind::shape, "vector field needs base dimension >= 1");
  if (!parts_.value || !parts_.jacobian) fail(ErrorKind::shape, "vector field needs value and jacobian");
}

Vector CylinderVectorField::value(double t, ConstVectorRef x) const {
  Vector out(idx(parts_.base_dim));
  parts_.value(t, x, out);
  return out;
}

Matrix CylinderVectorField::jacobian(double t, ConstVectorRef x) const {
  Matrix out(idx(parts_.base_dim), idx(parts_.base_dim));
  parts_.jacobian(t, x, out);
  return out;
}

Vector CylinderVectorField::full_value(double t, ConstVectorRef x, std::size_t n) const {
  if (n < parts_.base_dim) fail(ErrorKind::shape, "embedding dimension below the field base");
  Vector out = Vector::Zero(idx(n));
  parts_.value(t, x, out.head(idx(parts_.base_dim)));
  return out;
}

Matrix CylinderVectorField::full_jacobian(double t, ConstVectorRef x, std::size_t n) const {
  if (n < parts_.base_dim) fail(ErrorKind::shape, "embedding dimension below the field base");
  Matrix out = Matrix::Zero(idx(n), idx(n));
  const auto b = idx(parts_.base_dim);
  Matrix block(b, b);
  parts_.jacobian(t, x, block);
  out.topLeftCorner(b, b) = block;
  return out;
}

CylinderFunction operator+(const CylinderFunction& a, const CylinderFunction& b) {
  CylinderFunction::Parts p;
  p.base_dim = std::max(a.base_dim(), b.base_dim());
  p.value = [a, b](double t, ConstVectorRef x) { return a(t, x) + b(t, x); };
  if (a.differentiable() && b.differentiable()) {
    p.gradient = [a, b](double t, ConstVectorRef x, VectorRef out) {
      out.setZero();
      Vector ga = a.gradient(t, x);
      Vector gb = b.gradient(t, x);
      out.head(ga.size()) += ga;
      out.head(gb.size()) += gb;
    };
  }
  p.time_derivative = [a, b](double t, ConstVectorRef x) {
    return a.time_derivative(t, x) + b.time_derivative(t, x);
  };
  p.bounded = a.bounded() && b.bounded();
  p.terminal_zero = a.terminal_zero() && b.terminal_zero();
  p.horizon = a.horizon();
  p.name = "(" + a.name() + " + " + b.name() + ")";
  return CylinderFunction(std::move(p));
}

CylinderFunction operator*(double c, const CylinderFunction& u) {
  CylinderFunction::Parts p = u.parts();
  p.value = [c, u](double t, ConstVectorRef x) { return c * u(t, x); };
  if (u.differentiable()) {
    p.gradient = [c, u](double t, ConstVectorRef x, VectorRef out) {
      u.gradient(t, x, out);
      out *= c;
    };
  }
  p.time_derivative = [c, u](double t, ConstVectorRef x) { return c * u.time_derivative(t, x); };
  p.terminal_zero = u.terminal_zero() || c == 0.0;
  p.name = std::to_string(c) + "*" + u.name();
  return CylinderFunction(std::move(p));
}

CylinderFunction vanish_at_horizon(const CylinderFunction& u, double horizon, double power) {
  if (!(power >= 1.0)) fail(ErrorKind::domain, "horizon factor power must be >= 1 for a C^1 result");
  auto factor = [horizon, power](double t) { return std::pow(std::max(horizon - t, 0.0), power); };
  auto factor_dt = [horizon, power](double t) {
    return -power * std::pow(std::max(horizon - t, 0.0), power - 1.0);
  };
  CylinderFunction::Parts p = u.parts();
  p.value = [u, factor](double t, ConstVectorRef x) { return factor(t) * u(t, x); };
  if (u.differentiable()) {
    p.gradient = [u, factor](double t, ConstVectorRef x, VectorRef out) {
      u.gradient(t, x, out);
      out *= factor(t);
    };
  }
  p.time_derivative = [u, factor, factor_dt](double t, ConstVectorRef x) {
    return factor_dt(t) * u(t, x) + factor(t) * u.time_derivative(t, x);
  };
  p.terminal_zero = true;
  p.horizon = horizon;
  p.name = "(T-t)^" + std::to_string(power) + "*" + u.name();
  return CylinderFunction(std::move(p));
}

CylinderVectorField operator+(const CylinderVectorField& a, const CylinderVectorField& b) {
  CylinderVectorField::Parts p;
  p.base_dim = std::max(a.base_dim(), b.base_dim());
  const auto na = idx(a.base_dim());
  const auto nb = idx(b.base_dim());
  p.value = [a, b, na, nb](double t, ConstVectorRef x, VectorRef out) {
    out.setZero();
    Vector va(na), vb(nb);
    a.value(t, x, va);
    b.value(t, x, vb);
    out.head(na) += va;
    out.head(nb) += vb;
  };
  p.jacobian = [a, b, na, nb](double t, ConstVectorRef x, MatrixRef out) {
    out.setZero();
    Matrix ja(na, na), jb(nb, nb);
    a.jacobian(t, x, ja);
    b.jacobian(t, x, jb);
    out.topLeftCorner(na, na) += ja;
    out.topLeftCorner(nb, nb) += jb;
  };
  p.bounded = a.bounded() && b.bounded();
  p.compact_support = a.compact_support() && b.compact_support();
  p.name = "(" + a.name() + " + " + b.name() + ")";
  return CylinderVectorField(std::move(p));
}

CylinderVectorField operator*(double c, const CylinderVectorField& f) {
  CylinderVectorField::Parts p;
  p.base_dim = f.base_dim();
  p.value = [c, f](double t, ConstVectorRef x, VectorRef out) {
    f.value(t, x, out);
    out *= c;
  };
  p.jacobian = [c, f](double t, ConstVectorRef x, MatrixRef out) {
    f.jacobian(t, x, out);
    out *= c;
  };
  p.bounded = f.bounded();
  p.compact_support = f.compact_support();
  p.name = std::to_string(c) + "*" + f.name();
  return CylinderVectorField(std::move(p));
}

CylinderVectorField transform(const Matrix& a, const CylinderVectorField& f) {
  if (a.rows() != a.cols() || a.rows() < idx(f.base_dim())) {
    fail(ErrorKind::shape, "transform needs a square matrix covering the field base");
  }
  const auto n = a.rows();
  const auto nf = idx(f.base_dim());
  CylinderVectorField::Parts p;
  p.base_dim = static_cast<std::size_t>(n);
  p.value = [a, f, nf](double t, ConstVectorRef x, VectorRef out) {
    Vector v(nf);
    f.value(t, x, v);
    out.noalias() = a.leftCols(nf) * v;
  };
  p.jacobian = [a, f, nf](double t, ConstVectorRef x, MatrixRef out) {
    Matrix j(nf, nf);
    f.jacobian(t, x, j);
    out.setZero();
    out.leftCols(nf).noalias() = a.leftCols(nf) * j;
  };
  p.bounded = f.bounded();
  p.compact_support = f.compact_support();
  p.name = "A*" + f.name();
  return CylinderVectorField(std::move(p));
}

CylinderVectorField time_modulated(const CylinderVectorField& f, double amplitude, double period) {
  auto profile = [amplitude, period](double t) {
    return 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
  };
  CylinderVectorField::Parts p;
  p.base_dim = f.base_dim();
  p.value = [f, profile](double t, ConstVectorRef x, VectorRef out) {
    f.value(t, x, out);
    out *= profile(t);
  };
  p.jacobian = [f, profile](double t, ConstVectorRef x, MatrixRef out) {
    f.jacobian(t, x, out);
    out *= profile(t);
  };
  p.bounded = f.bounded();
  p.compact_support = f.compact_support();
  p.name = f.name() + "*(1+a sin)";
  return CylinderVectorField(std::move(p));
}

}  // namespace gausslab
