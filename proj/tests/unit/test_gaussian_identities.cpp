#include <doctest.h>

#include <cmath>
#include <random>

#include "gausslab/catalog.hpp"
#include "gausslab/error.hpp"
#include "gausslab/identities.hpp"

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

Matrix mat(int n, std::initializer_list<double> v) {
  Matrix m(n, n);
  Eigen::Index i = 0;
  for (double x : v) {
    m(i / n, i % n) = x;
    ++i;
  }
  return m;
}

// random symmetric L whose sandwich has spectral radius <= 1
Matrix random_symmetric(std::mt19937_64& eng, const Spectrum& s) {
  const auto n = static_cast<Eigen::Index>(s.dim());
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (auto& v : a.reshaped()) v = g(eng);
  Matrix l = 0.5 * (a + a.transpose());
  const Vector r = s.eigenvalues().cwiseSqrt();
  const Matrix m = r.asDiagonal() * l * r.asDiagonal();
  return l / Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("exp-quadratic integral examples") {
  const Spectrum one = Spectrum::from_values({1.0});
  const QuadraticForm q1(mat(1, {1.0}), one);
  CHECK(exp_quadratic_integral(q1, 0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(exp_quadratic_integral(q1, 0.0) == 1.0);

  const Spectrum two = Spectrum::from_values({1.0, 1.0});
  const QuadraticForm swap(mat(2, {0, 1, 1, 0}), two);
  // betas are +-1: det = (1 + 0.5)(1 - 0.5)
  CHECK(exp_quadratic_integral(swap, 0.25) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-14));
  const Estimate mc = mc_exp_quadratic(swap, 0.25, 1000000, 3);
  CHECK(std::abs(mc.value - exp_quadratic_integral(swap, 0.25)) <= 3 * mc.std_error);

  // beyond eps_0 = 1/2 for the eigenvalue -1
  CHECK(kind_of([&] { exp_quadratic_integral(swap, 0.6); }) == ErrorKind::divergent_integral);
  try {
    exp_quadratic_integral(swap, 0.6);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("sandwich matrices") {
  const Spectrum s = Spectrum::power_law(2.0, 4);
  std::mt19937_64 eng(1);
  std::normal_distribution<double> g;
  Matrix l(4, 4);
  for (auto& v : l.reshaped()) v = g(eng);
  const QuadraticForm qf(l, s);
  const Vector r = s.eigenvalues().cwiseSqrt();
  CHECK((qf.m() - r.asDiagonal() * l * r.asDiagonal()).norm() <= 1e-12);
  CHECK((qf.ms() - 0.5 * (qf.m() + qf.m().transpose())).norm() <= 1e-12);
  CHECK(!qf.symmetric());
  CHECK(qf.trace_power(1) == doctest::Approx(qf.m().trace()).epsilon(1e-12));
  CHECK(qf.trace_power(2) == doctest::Approx((qf.ms() * qf.ms()).trace()).epsilon(1e-12));
}

TEST_CASE("closed form against Monte Carlo for random forms") {
  const Spectrum s = Spectrum::power_law(2.0, 6);
  std::mt19937_64 eng(19);
  for (int i = 0; i < 10; ++i) {
    const QuadraticForm qf(random_symmetric(eng, s), s);
    for (double eps : {0.1, 0.3}) {
      const Estimate mc = mc_exp_quadratic(qf, eps, 200000, 100u + static_cast<unsigned>(i));
      CHECK(std::abs(mc.value - exp_quadratic_integral(qf, eps)) <= 3 * mc.std_error);
    }
  }
  // nonsymmetric L: the symmetrization governs the integral
  std::normal_distribution<double> g;
  for (int i = 0; i < 3; ++i) {
    Matrix l(6, 6);
    for (auto& v : l.reshaped()) v = 0.3 * g(eng);
    const QuadraticForm qf(l, s);
    const Estimate mc = mc_exp_quadratic(qf, 0.3, 200000, 200u + static_cast<unsigned>(i));
    CHECK(std::abs(mc.value - exp_quadratic_integral(qf, 0.3)) <= 3 * mc.std_error);
    const QuadraticForm sym(0.5 * (l + l.transpose()), s);
    CHECK(exp_quadratic_integral(qf, 0.3) == doctest::Approx(exp_quadratic_integral(sym, 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("log-Laplace function") {
  const Spectrum one = Spectrum::from_values({1.0});
  const QuadraticForm q1(mat(1, {1.0}), one);
  CHECK(log_laplace_S(q1, 0.0) == 1.0);
  CHECK(log_laplace_S(q1, 0.1) == doctest::Approx(std::pow(1.2, -0.5) * std::exp(0.1)).epsilon(1e-15));
  CHECK(log_laplace_S(q1, 0.1) == doctest::Approx(1.008879).epsilon(1e-6));

  const Spectrum s = Spectrum::power_law(2.0, 6);
  std::mt19937_64 eng(4);
  for (int i = 0; i < 5; ++i) {
    const QuadraticForm qf(random_symmetric(eng, s), s);
    const double h = 1e-5;
    CHECK(std::abs((log_laplace_S(qf, h) - log_laplace_S(qf, -h)) / (2 * h)) <= 1e-8);
  }
}

TEST_CASE("cumulants") {
  const Spectrum one = Spectrum::from_values({1.0});
  const QuadraticForm q1(mat(1, {1.0}), one);
  CHECK(quadratic_cumulant(q1, 1) == 0.0);
  CHECK(quadratic_cumulant(q1, 2) == 2.0);
  CHECK(quadratic_cumulant(q1, 3) == 8.0);
  CHECK(quadratic_cumulant(q1, 4) == 48.0);
  CHECK(quadratic_cumulant(QuadraticForm(mat(1, {0.0}), one), 2) == 0.0);
  CHECK(kind_of([&] { quadratic_cumulant(q1, 0); }) == ErrorKind::domain);

  // cumulants of a sum of independent blocks add
  const Spectrum s = Spectrum::power_law(2.0, 5);
  std::mt19937_64 eng(8);
  const Matrix full = random_symmetric(eng, s);
  Matrix block = Matrix::Zero(5, 5);
  block.topLeftCorner(2, 2) = full.topLeftCorner(2, 2);
  block.bottomRightCorner(3, 3) = full.bottomRightCorner(3, 3);
  Matrix a = Matrix::Zero(5, 5), b = Matrix::Zero(5, 5);
  a.topLeftCorner(2, 2) = full.topLeftCorner(2, 2);
  b.bottomRightCorner(3, 3) = full.bottomRightCorner(3, 3);
  for (int m = 2; m <= 6; ++m) {
    CHECK(quadratic_cumulant(QuadraticForm(block, s), m) ==
          doctest::Approx(quadratic_cumulant(QuadraticForm(a, s), m) + quadratic_cumulant(QuadraticForm(b, s), m))
              .epsilon(1e-12));
  }
}

TEST_CASE("central moments") {
  const Spectrum one = Spectrum::from_values({1.0});
  const QuadraticForm q1(mat(1, {1.0}), one);
  // E(x^2 - 1)^m from the Gaussian moments 1, 3, 15, 105 by the binomial theorem
  CHECK(central_moment(q1, 1) == 0.0);
  CHECK(central_moment(q1, 2) == 2.0);
  CHECK(central_moment(q1, 3) == 8.0);
  CHECK(central_moment(q1, 4) == 60.0);
  const double gm[] = {1, 1, 3, 15, 105, 945, 10395};  // E x^{2j}
  for (int m = 1; m <= 6; ++m) {
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) sum += std::tgamma(m + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(m - j + 1.0)) *
                                       gm[j] * ((m - j) % 2 ? -1.0 : 1.0);
    CHECK(central_moment(q1, m) == doctest::Approx(sum).epsilon(1e-14));
  }

  const Spectrum two = Spectrum::from_values({1.0, 1.0});
  const QuadraticForm id(Matrix::Identity(2, 2), two);
  CHECK(central_moment(id, 4) == 144.0);
  const Estimate mc = mc_central_moment(id, 4, 1000000, 5);
  CHECK(std::abs(mc.value - 144.0) <= 3 * mc.std_error);
  // no single-trace law: 144 / Tr M^4 = 72 while the 1-d case gives 60
  CHECK(single_trace_ratio(id, 4) == 72.0);
  CHECK(single_trace_ratio(q1, 4) == 60.0);

  const Spectrum s = Spectrum::power_law(2.0, 6);
  std::mt19937_64 eng(13);
  for (int i = 0; i < 4; ++i) {
    const QuadraticForm qf(random_symmetric(eng, s), s);
    CHECK(central_moment(qf, 2) == doctest::Approx(2 * qf.trace_power(2)).epsilon(1e-12));
    CHECK(central_moment(qf, 3) == doctest::Approx(8 * qf.trace_power(3)).epsilon(1e-12));
    CHECK(central_moment(qf, 4) ==
          doctest::Approx(48 * qf.trace_power(4) + 12 * qf.trace_power(2) * qf.trace_power(2)).epsilon(1e-12));
    for (int m : {2, 3}) {
      const Estimate e = mc_central_moment(qf, m, 400000, 50u + static_cast<unsigned>(i));
      CHECK(std::abs(e.value - central_moment(qf, m)) <= 3 * e.std_error);
    }
  }
  CHECK(kind_of([&] { central_moment(q1, 13); }) == ErrorKind::domain);
  CHECK(kind_of([&] { central_moment(q1, 0); }) == ErrorKind::domain);
}

TEST_CASE("moment-cumulant recursion") {
  // standard normal: kappa_2 = 1, others 0 -> moments 0, 1, 0, 3, 0, 15
  std::vector<double> k(7, 0.0);
  k[2] = 1.0;
  const double expected[] = {1, 0, 1, 0, 3, 0, 15};
  for (int m = 1; m <= 6; ++m) CHECK(moment_from_cumulants(k, m) == expected[m]);
}

TEST_CASE("divergence probe") {
  const Spectrum s = Spectrum::power_law(2.0, 3);
  const SampleBatch b = sample_gaussian(s, 20000, 6);
  const DivergenceProbe z = divq_lp_probe(make_field("zero(n=3)", 3, 1.0), s, 2.0, b);
  CHECK(z.lhs.value == 0.0);
  CHECK(z.rhs_core.value == 0.0);

  const DivergenceProbe bump = divq_lp_probe(make_field("bump(k=1, n=3, radius=3)", 3, 1.0), s, 2.0, b);
  CHECK(std::isfinite(bump.lhs.value));
  CHECK(std::isfinite(bump.rhs_core.value));
  CHECK(bump.lhs.value > 0.0);
  CHECK(bump.ratio == doctest::Approx(bump.lhs.value / bump.rhs_core.value));

  // lhs is p-homogeneous
  const DivergenceProbe dbl = divq_lp_probe(2.0 * make_field("bump(k=1, n=3, radius=3)", 3, 1.0), s, 3.0, b);
  const DivergenceProbe sgl = divq_lp_probe(make_field("bump(k=1, n=3, radius=3)", 3, 1.0), s, 3.0, b);
  CHECK(dbl.lhs.value == doctest::Approx(8.0 * sgl.lhs.value).epsilon(1e-12));
}
