#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gausslab/calculus.hpp"
#include "gausslab/catalog.hpp"
#include "gausslab/error.hpp"

using namespace gausslab;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::domain;
}

Vector point(std::mt19937_64& eng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = g(eng);
  return x;
}

// mixed absolute/relative error of a finite-difference comparison
double fd_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

const std::vector<std::string> kFunctions = {
    "const(c=1.5)",   "coord(k=2)",         "square(k=1)",         "cos(k=1, freq=2)",
    "sin(k=2, freq=1.3, phase=0.3)", "tanh(k=1, scale=2)", "gauss(k=3, width=0.7)",
    "wave(a1=1, a2=0.5)", "cossin(k1=1, k2=3)", "cos(k=2, tpow=2)", "wave(a1=0.4, a2=2, tpow=1, amp=3)"};

const std::vector<std::string> kFields = {
    "const(k=2, c=1)", "linear(k=1, a=0.7)", "decay(n=3, a=1)",  "shear(i=1, j=2, a=2)",
    "rotanh(a=0.5)",   "sinfield(n=3, a=0.3)", "tanhmix(a=1)",    "bump(k=1, n=3, radius=3)",
    "swirl(radius=2)", "rotanh(a=0.5, tmod=0.5)", "sinfield(n=2, a=0.3, tmod=0.5)"};

}  // namespace

TEST_CASE("div_q examples") {
  const Spectrum one = Spectrum::from_values({1.0});
  const CylinderVectorField lin = make_field("linear(k=1, a=1)", 1, 1.0);
  Vector x(1);
  x << 0.0;
  CHECK(div_q(lin, one, 0.0, x) == doctest::Approx(1.0).epsilon(1e-15));
  x << 2.0;
  CHECK(div_q(lin, one, 0.0, x) == doctest::Approx(-3.0).epsilon(1e-15));

  const CylinderVectorField c = make_field("const(k=1, c=2.5)", 1, 1.0);
  for (double x1 : {-1.0, 0.0, 0.4}) {
    x << x1;
    CHECK(div_q(c, one, 0.3, x) == doctest::Approx(-2.5 * x1).epsilon(1e-15));
  }
}

TEST_CASE("div_q agrees with trace minus the Q^{-1} inner product assembled by hand") {
  const Spectrum s = Spectrum::power_law(2.0, 6);
  std::mt19937_64 eng(3);
  for (const auto& text : kFields) {
    const CylinderVectorField f = make_field(text, 6, 1.0);
    for (int i = 0; i < 10; ++i) {
      const Vector x = point(eng, 6);
      const double t = 0.1 * i;
      const Matrix j = f.full_jacobian(t, x, 6);
      const Vector g = f.full_value(t, x, 6);
      double inner = 0.0;
      for (Eigen::Index k = 0; k < 6; ++k) inner += x[k] * g[k] / s[static_cast<std::size_t>(k)];
      CHECK(div_q(f, s, t, x) == doctest::Approx(j.trace() - inner).epsilon(1e-13));
    }
  }
}

TEST_CASE("catalog gradients match central differences") {
  std::mt19937_64 eng(5);
  const double h = 1e-5;
  for (const auto& text : kFunctions) {
    const CylinderFunction u = make_function(text, 1.0);
    REQUIRE(u.differentiable());
    for (int i = 0; i < 20; ++i) {
      const Vector x = point(eng, u.base_dim());
      const double t = 0.05 * i;
      const Vector g = u.gradient(t, x);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        CHECK(fd_error(g[k], (u(t, xp) - u(t, xm)) / (2 * h)) <= 1e-6);
      }
      if (t > h && t < 1 - h) {
        CHECK(fd_error(u.time_derivative(t, x), (u(t + h, x) - u(t - h, x)) / (2 * h)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("catalog and combinator Jacobians match central differences") {
  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<CylinderVectorField> fields;
  for (const auto& text : kFields) fields.push_back(make_field(text, 3, 1.0));
  // random polynomial-trigonometric combinations
  for (int r = 0; r < 8; ++r) {
    Matrix a(3, 3);
    for (auto& v : a.reshaped()) v = unif(eng);
    const auto& f1 = fields[static_cast<std::size_t>(r) % fields.size()];
    const auto& f2 = fields[static_cast<std::size_t>(r + 3) % fields.size()];
    fields.push_back(transform(a, f1) + unif(eng) * f2);
  }
  const double h = 1e-5;
  for (const auto& f : fields) {
    for (int i = 0; i < 10; ++i) {
      const Vector x = point(eng, 3);
      const double t = 0.09 * i;
      const Matrix j = f.full_jacobian(t, x, 3);
      for (Eigen::Index k = 0; k < 3; ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const Vector col = (f.full_value(t, xp, 3) - f.full_value(t, xm, 3)) / (2 * h);
        for (Eigen::Index r = 0; r < 3; ++r) CHECK(fd_error(j(r, k), col[r]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("cylinder objects ignore coordinates beyond the base") {
  std::mt19937_64 eng(8);
  for (const auto& text : kFunctions) {
    const CylinderFunction u = make_function(text, 1.0);
    Vector x = point(eng, u.base_dim() + 2);
    const double before = u(0.2, x);
    x[static_cast<Eigen::Index>(u.base_dim())] += 3.7;
    CHECK(u(0.2, x) == before);
  }
  for (const auto& text : kFields) {
    const CylinderVectorField f = make_field(text, 3, 1.0);
    Vector x = point(eng, f.base_dim() + 2);
    const Vector before = f.full_value(0.2, x, f.base_dim() + 2);
    // values live in the span of the base coordinates
    CHECK(before.tail(2).isZero(0.0));
    CHECK(f.full_jacobian(0.2, x, f.base_dim() + 2).rightCols(2).isZero(0.0));
    x[static_cast<Eigen::Index>(f.base_dim())] -= 1.3;
    CHECK((f.full_value(0.2, x, f.base_dim() + 2) - before).norm() == 0.0);
  }
}

TEST_CASE("terminal-zero functions vanish at the horizon") {
  std::mt19937_64 eng(9);
  for (const auto& text : {"cos(k=2, tpow=2)", "wave(a1=0.4, a2=2, tpow=1, amp=3)", "tanh(k=1, tpow=1.5)"}) {
    const CylinderFunction u = make_function(text, 2.0);
    CHECK(u.terminal_zero());
    for (int i = 0; i < 50; ++i) CHECK(std::abs(u(2.0, point(eng, u.base_dim(), 3.0))) <= 1e-12);
  }
  CHECK(!make_function("cos(k=1)", 1.0).terminal_zero());
  const CylinderFunction v = vanish_at_horizon(make_function("sin(k=1)", 1.0), 1.0);
  Vector x(1);
  x << 0.7;
  CHECK(v(1.0, x) == 0.0);
}

TEST_CASE("sobolev and qhalf-inverse norms") {
  const auto grid = uniform_grid(1.0, 33);
  const Spectrum one = Spectrum::from_values({1.0});
  const SampleBatch b1 = sample_gaussian(one, 50000, 17);

  CHECK(sobolev_norm(make_field("zero(n=1)", 1, 1.0), 2.0, one, b1, grid).value == 0.0);
  const Estimate e1 = sobolev_norm(make_field("const(k=1, c=1)", 1, 1.0), 2.0, one, b1, grid);
  CHECK(e1.value == doctest::Approx(1.0).epsilon(1e-14));

  const Estimate lin = sobolev_norm(make_field("linear(k=1, a=1)", 1, 1.0), 2.0, one, b1, grid);
  CHECK(std::abs(lin.value - std::sqrt(2.0)) <= 3 * lin.std_error);
  CHECK(lin.std_error > 0.0);

  const Spectrum two = Spectrum::from_values({1.0, 0.25});
  const SampleBatch b2 = sample_gaussian(two, 1000, 18);
  CHECK(qhalf_inverse_norm(make_field("zero(n=2)", 2, 1.0), 2.0, two, b2, grid).value == 0.0);
  CHECK(qhalf_inverse_norm(make_field("const(k=2, c=1)", 2, 1.0), 2.0, two, b2, grid).value ==
        doctest::Approx(2.0).epsilon(1e-14));
  const Estimate q = qhalf_inverse_norm(make_field("linear(k=1, a=1)", 1, 1.0), 2.0, one, b1, grid);
  CHECK(std::abs(q.value - 1.0) <= 3 * q.std_error);

  CHECK(kind_of([&] { sobolev_norm(make_field("const(k=1, c=1)", 1, 1.0), 2.0, one, b1, {}); }) ==
        ErrorKind::config);
}

TEST_CASE("norms are absolutely homogeneous") {
  const auto grid = uniform_grid(1.0, 17);
  const Spectrum s = Spectrum::power_law(2.0, 3);
  const SampleBatch b = sample_gaussian(s, 4000, 4);
  for (const auto& text : {"rotanh(a=0.5)", "decay(n=3, a=1)", "sinfield(n=3, a=0.3)"}) {
    const CylinderVectorField f = make_field(text, 3, 1.0);
    for (double c : {-2.0, 0.5, 3.0}) {
      // same draws, so homogeneity holds to round-off, well inside MC tolerance
      CHECK(sobolev_norm(c * f, 1.5, s, b, grid).value ==
            doctest::Approx(std::abs(c) * sobolev_norm(f, 1.5, s, b, grid).value).epsilon(1e-12));
      CHECK(qhalf_inverse_norm(c * f, 3.0, s, b, grid).value ==
            doctest::Approx(std::abs(c) * qhalf_inverse_norm(f, 3.0, s, b, grid).value).epsilon(1e-12));
    }
  }
}

TEST_CASE("project_smooth") {
  const Spectrum s = Spectrum::power_law(2.0, 4);
  const SampleBatch b = sample_gaussian(s, 20000, 12);
  Vector x(4);
  x << 0.4, -0.3, 0.8, 0.1;

  const CylinderVectorField based = make_field("rotanh(a=0.5)", 4, 1.0);
  const CylinderVectorField same = project_smooth(based, 2, s, b);
  CHECK((same.full_value(0.1, x, 4) - based.full_value(0.1, x, 4)).norm() == 0.0);

  // x_2 e_1 smoothed onto the first coordinate: mean of x_2 ~ N(0, 1/4)
  const CylinderVectorField shear = project_smooth(make_field("shear(i=1, j=2, a=1)", 4, 1.0), 1, s, b);
  const double se = std::sqrt(s[1] / 20000.0);
  CHECK(std::abs(shear.value(0.0, x)[0]) <= 3 * se);
  CHECK(shear.base_dim() == 1);

  const CylinderVectorField c = project_smooth(make_field("const(k=1, c=1.7)", 4, 1.0), 1, s, b);
  CHECK(c.value(0.0, x)[0] == doctest::Approx(1.7).epsilon(1e-14));

  CHECK(kind_of([&] { project_smooth(based, 0, s, b); }) == ErrorKind::degenerate);
}

TEST_CASE("trapezoid weights") {
  const auto grid = uniform_grid(2.0, 5);
  const auto w = trapezoid_weights(grid);
  double total = 0.0, first = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    first += w[i] * grid[i];
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(first == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(kind_of([] { trapezoid_weights({}); }) == ErrorKind::config);
}

TEST_CASE("schatten power") {
  Matrix a(2, 2);
  a << 3.0, 0.0, 0.0, -4.0;
  CHECK(schatten_power(a, 2.0) == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(schatten_power(a, 1.0) == doctest::Approx(7.0).epsilon(1e-14));
}
