#include <doctest.h>

#include <cfloat>
#include <cmath>
#include <random>

#include "gausslab/error.hpp"
#include "gausslab/rng.hpp"
#include "gausslab/spectrum.hpp"

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

}  // namespace

TEST_CASE("power-law spectrum") {
  const Spectrum s = Spectrum::power_law(2.0, 3);
  REQUIRE(s.dim() == 3);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.25);
  CHECK(s[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(s.trace() == doctest::Approx(1.0 + 0.25 + 1.0 / 9.0).epsilon(1e-15));
  CHECK(kind_of([] { Spectrum::power_law(0.0, 3); }) == ErrorKind::invalid_spectrum);
  CHECK(kind_of([] { Spectrum::power_law(2.0, 0); }) == ErrorKind::invalid_spectrum);
}

TEST_CASE("explicit spectrum") {
  const Spectrum one = Spectrum::from_values({1.0});
  CHECK(one.dim() == 1);
  CHECK(one[0] == 1.0);
  CHECK(kind_of([] { Spectrum::from_values({0.25, 1.0}); }) == ErrorKind::ordering);
  CHECK(kind_of([] { Spectrum::from_values({1.0, 0.0}); }) == ErrorKind::invalid_spectrum);
  CHECK(kind_of([] { Spectrum::from_values({1.0, -0.5}); }) == ErrorKind::invalid_spectrum);
  // ties are allowed (non-increasing)
  CHECK(Spectrum::from_values({1.0, 1.0}).trace() == 2.0);
}

TEST_CASE("ou operators: reference values") {
  const OUOperators a = ou_operators(Spectrum::from_values({1.0}), 2.0);
  CHECK(a.tau[0] == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(a.sigma[0] == doctest::Approx(std::sqrt(1.0 - std::exp(-2.0))).epsilon(1e-15));
  CHECK(a.sigma[0] == doctest::Approx(0.929873).epsilon(1e-6));
  CHECK(a.qt[0] == doctest::Approx(0.864665).epsilon(1e-6));
  CHECK(a.alpha[0] == 0.5);

  const OUOperators b = ou_operators(Spectrum::from_values({1.0, 0.25}), 1.0);
  CHECK(b.tau[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(b.tau[1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(b.tau[0] == doctest::Approx(0.606531).epsilon(1e-6));
  CHECK(b.tau[1] == doctest::Approx(0.135335).epsilon(1e-5));

  const OUOperators z = ou_operators(Spectrum::power_law(2.0, 8), 0.0);
  for (Eigen::Index k = 0; k < 8; ++k) {
    CHECK(z.tau[k] == 1.0);
    CHECK(z.sigma[k] == 0.0);
    CHECK(z.qt[k] == 0.0);
  }
  CHECK(kind_of([] { ou_operators(Spectrum::power_law(2.0, 2), -1e-3); }) == ErrorKind::domain);
}

TEST_CASE("ou operators: properties over random (lambda, t)") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double lambda = std::pow(10.0, -4.0 * u(eng));
    const double t = lambda * std::pow(10.0, -3.0 + 4.5 * u(eng));
    const double s = lambda * std::pow(10.0, -3.0 + 4.5 * u(eng));
    const Spectrum one = Spectrum::from_values({lambda});
    const OUOperators ot = ou_operators(one, t), os = ou_operators(one, s), ost = ou_operators(one, s + t);
    CHECK(std::abs(ot.tau[0] * ot.tau[0] + ot.sigma[0] * ot.sigma[0] - 1.0) <= 4 * DBL_EPSILON);
    CHECK(ot.tau[0] > 0.0);
    CHECK(ot.tau[0] < 1.0);
    CHECK(std::abs(os.tau[0] * ot.tau[0] - ost.tau[0]) <= 1e-12 * ost.tau[0]);
    // independent oracle for the cancellation-safe sigma
    CHECK(ot.sigma[0] == doctest::Approx(std::sqrt(-std::expm1(-t / lambda))).epsilon(1e-14));
  }
  // tau nondecreasing... in the eigenvalue, so nonincreasing along k
  const OUOperators ops = ou_operators(Spectrum::power_law(2.0, 64), 0.3);
  for (Eigen::Index k = 0; k + 1 < 64; ++k) CHECK(ops.tau[k + 1] <= ops.tau[k]);
}

TEST_CASE("sampling: variance band and determinism") {
  const SampleBatch b = sample_gaussian(Spectrum::from_values({1.0}), 100000, 7);
  const double var = b.data().row(0).squaredNorm() / 1e5 - std::pow(b.data().row(0).mean(), 2);
  CHECK(var >= 0.985);
  CHECK(var <= 1.015);

  const SampleBatch c = sample_gaussian(Spectrum::from_values({1.0}), 100000, 7);
  CHECK((b.data().array() == c.data().array()).all());
  const SampleBatch d = sample_gaussian(Spectrum::from_values({1.0}), 100000, 8);
  CHECK(!(b.data().array() == d.data().array()).all());

  const SampleBatch two = sample_gaussian(Spectrum::from_values({1.0, 0.25}), 100000, 3);
  const double cov = (two.data().row(0).array() * two.data().row(1).array()).mean();
  CHECK(std::abs(cov) <= 3.0 * std::sqrt(0.25 / 1e5));
  CHECK(kind_of([] { sample_gaussian(Spectrum::from_values({1.0}), 0, 1); }) == ErrorKind::empty_batch);
}

TEST_CASE("sampling: per-coordinate variance within 5 SE") {
  const Spectrum s = Spectrum::power_law(2.0, 16);
  const std::size_t m = 20000;
  const SampleBatch b = sample_gaussian(s, m, 99);
  for (std::size_t k = 0; k < 16; ++k) {
    const double var = b.data().row(static_cast<Eigen::Index>(k)).squaredNorm() / m;
    // Var(x^2) = 2 lambda^2
    CHECK(std::abs(var - s[k]) <= 5.0 * std::sqrt(2.0 / m) * s[k]);
  }
}

TEST_CASE("sampling: chunked seeding is a pure function of (spectrum, m, seed)") {
  const Spectrum s = Spectrum::power_law(2.0, 4);
  const SampleBatch small = sample_gaussian(s, kSampleChunk + 10, 5);
  const SampleBatch large = sample_gaussian(s, 3 * kSampleChunk, 5);
  // the first chunks coincide: chunk c always comes from derive_seed(seed, c)
  CHECK((small.data().leftCols(kSampleChunk).array() == large.data().leftCols(kSampleChunk).array()).all());
}

TEST_CASE("rotate_pair") {
  const Spectrum s = Spectrum::power_law(2.0, 3);
  Vector x(3), y(3);
  x << 0.3, -1.2, 0.5;
  y << 1.1, 0.4, -0.7;
  const auto [x0, y0] = rotate_pair(x, y, ou_operators(s, 0.0));
  CHECK((x0 - x).norm() == 0.0);
  CHECK((y0 - y).norm() == 0.0);

  // tau -> 0, sigma -> 1: quarter rotation
  const auto [xq, yq] = rotate_pair(x, y, ou_operators(Spectrum::from_values({1.0, 1.0, 1.0}), 80.0));
  CHECK((xq - y).norm() < 1e-15);
  CHECK((yq + x).norm() < 1e-15);

  const auto [xr, yr] = rotate_pair(x, y, ou_operators(s, 0.37));
  CHECK(xr.squaredNorm() + yr.squaredNorm() == doctest::Approx(x.squaredNorm() + y.squaredNorm()).epsilon(1e-14));

  CHECK(kind_of([&] { rotate_pair(Vector::Zero(2), y, ou_operators(s, 0.1)); }) == ErrorKind::shape);
}

TEST_CASE("rotate_pair preserves mu x mu: moments and cross-covariances within 4 SE") {
  const Spectrum s = Spectrum::power_law(2.0, 3);
  const std::size_t m = 100000;
  const SampleBatch bx = sample_gaussian(s, m, 21), by = sample_gaussian(s, m, 22);
  for (double eps : {0.05, 0.5}) {
    const OUOperators ops = ou_operators(s, eps);
    Matrix rx(3, static_cast<Eigen::Index>(m)), ry(3, static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const auto [a, b] = rotate_pair(bx.sample(j), by.sample(j), ops);
      rx.col(static_cast<Eigen::Index>(j)) = a;
      ry.col(static_cast<Eigen::Index>(j)) = b;
    }
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double lambda = s[static_cast<std::size_t>(k)];
      for (const Matrix* v : {&rx, &ry}) {
        for (int order = 1; order <= 4; ++order) {
          const Eigen::ArrayXd p = v->row(k).array().pow(order).transpose();
          const double se = std::sqrt((p - p.mean()).square().sum() / (m - 1.0) / m);
          const double exact = order == 2 ? lambda : order == 4 ? 3 * lambda * lambda : 0.0;
          CHECK(std::abs(p.mean() - exact) <= 4 * se);
        }
      }
      // x'_k and y'_k uncorrelated
      const Eigen::ArrayXd cross = (rx.row(k).array() * ry.row(k).array()).transpose();
      const double se = std::sqrt((cross - cross.mean()).square().sum() / (m - 1.0) / m);
      CHECK(std::abs(cross.mean()) <= 4 * se);
    }
  }
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
