#include <doctest.h>

#include <cmath>

#include "gausslab/catalog.hpp"
#include "gausslab/error.hpp"
#include "gausslab/transport.hpp"

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

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const Spectrum kSpec = Spectrum::power_law(2.0, 4);
const ODEOptions kOde{};

}  // namespace

TEST_CASE("flow") {
  const Vector x = vec({0.3, -0.2, 0.5, 0.1});
  const CylinderVectorField c = make_field("const(k=1, c=1)", 4, 1.0);
  const Vector y = flow(c, kSpec, 0.2, 0.7, x, kOde);
  CHECK((y - (x + 0.5 * Vector::Unit(4, 0))).norm() <= 1e-12);
  CHECK((flow(c, kSpec, 0.4, 0.4, x, kOde) - x).norm() == 0.0);

  const CylinderVectorField d = make_field("decay(n=1, a=1)", 4, 2.0);
  const Vector one = flow(d, kSpec, 0.0, 1.0, vec({1.0, 0.0, 0.0, 0.0}), kOde);
  CHECK(std::abs(one[0] - std::exp(-1.0)) <= kOde.rel_tol * std::exp(-1.0) * 10);

  const CylinderVectorField r = make_field("rotanh(a=0.5, tmod=0.5)", 4, 1.0);
  for (double t1 : {0.3, 0.6}) {
    const Vector a = flow(r, kSpec, t1, 0.9, flow(r, kSpec, 0.1, t1, x, kOde), kOde);
    const Vector b = flow(r, kSpec, 0.1, 0.9, x, kOde);
    CHECK((a - b).norm() <= 10 * kOde.rel_tol * std::max(1.0, b.norm()));
    // backwards in time returns to the start
    CHECK((flow(r, kSpec, 0.9, 0.1, b, kOde) - x).norm() <= 10 * kOde.rel_tol);
  }
  // coordinates outside the field base never move
  CHECK(flow(r, kSpec, 0.0, 1.0, x, kOde).tail(2) == x.tail(2));
}

TEST_CASE("backward solution examples") {
  const CylinderFunction one = make_function("const(c=1)", 1.0);
  const CylinderVectorField c = make_field("const(k=1, c=2)", 4, 1.0);
  const Vector x = vec({0.3, -0.2, 0.5, 0.1});
  for (double t : {0.0, 0.25, 0.9}) {
    CHECK(backward_solution(one, c, kSpec, t, x, kOde).value == doctest::Approx(-(1.0 - t)).epsilon(1e-10));
  }
  CHECK(backward_solution(one, c, kSpec, 1.0, x, kOde).value == 0.0);

  const CylinderFunction lin = make_function("coord(k=1)", 1.0);
  const CylinderVectorField zero = make_field("zero(n=1)", 4, 1.0);
  for (double t : {0.0, 0.5}) {
    CHECK(backward_solution(lin, zero, kSpec, t, x, kOde).value == doctest::Approx(-(1.0 - t) * 0.3).epsilon(1e-10));
  }

  const ConventionReport& rep = resolved_convention();
  CHECK(rep.chosen.sign == -1.0);
  CHECK(rep.chosen.time == TimeArgument::absolute);
  std::size_t passing = 0;
  for (const auto& cand : rep.candidates) passing += cand.pass ? 1 : 0;
  CHECK(passing == 1);
}

TEST_CASE("residual meter") {
  const ProbeGrid probes = transport_probes(kSpec, 2, 64, 1.0);
  REQUIRE(probes.size() == 64);
  const CylinderVectorField f = make_field("tanhmix(a=1)", 4, 1.0);
  const CylinderFunction zero_u = make_function("const(c=0)", 1.0);
  CHECK(pde_residual(numeric(zero_u), f, make_function("const(c=0)", 1.0), probes).max == 0.0);
  const ResidualReport r1 = pde_residual(numeric(zero_u), f, make_function("const(c=1)", 1.0), probes);
  CHECK(r1.max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.mean == doctest::Approx(1.0).epsilon(1e-12));

  // the residual under the opposite sign is 2|f| for f = 1, F = c
  const CylinderFunction one = make_function("const(c=1)", 1.0);
  const CylinderVectorField c = make_field("const(k=1, c=1)", 4, 1.0);
  const BackwardConvention wrong{+1.0, TimeArgument::absolute};
  CHECK(pde_residual(numeric(backward_function(one, c, kSpec, kOde, wrong)), c, one, probes).max ==
        doctest::Approx(2.0).epsilon(1e-6));

  for (const char* pair : {"cos(k=2, tpow=2)|tanhmix(a=1)", "wave(a1=1, a2=0.5)|sinfield(n=2, a=0.3, tmod=0.5)",
                           "tanh(k=1)|rotanh(a=0.5)"}) {
    const std::string s(pair);
    const auto bar = s.find('|');
    const CylinderFunction src = make_function(s.substr(0, bar), 1.0);
    const CylinderVectorField fld = make_field(s.substr(bar + 1), 4, 1.0);
    const CylinderFunction u = backward_function(src, fld, kSpec, kOde);
    CHECK(u.terminal_zero());
    CHECK(pde_residual(numeric(u), fld, src, probes).max <= 1e-3);
  }
}

TEST_CASE("maximum principle") {
  const ProbeGrid probes = transport_probes(kSpec, 2, 64, 1.0);
  const CylinderFunction one = make_function("const(c=1)", 1.0);
  const CylinderVectorField c = make_field("const(k=1, c=1)", 4, 1.0);
  // probes start just above t = 0, so the tight value is 1 - margin
  ProbeGrid tight = probes;
  tight.times.push_back(0.0);
  tight.points.push_back(Vector::Zero(2));
  const MaxPrincipleReport m = max_principle_check(numeric(backward_function(one, c, kSpec, kOde)), one, tight, 1.0);
  CHECK(m.ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m.pass);

  const CylinderFunction zero = make_function("const(c=0)", 1.0);
  const MaxPrincipleReport z = max_principle_check(numeric(backward_function(zero, c, kSpec, kOde)), zero, probes, 1.0);
  CHECK(z.max_u == 0.0);

  const CylinderFunction src = make_function("sin(k=2, phase=0.3)", 2.0);
  const CylinderVectorField fld = make_field("rotanh(a=0.5)", 4, 2.0);
  const ProbeGrid p2 = transport_probes(kSpec, 2, 64, 2.0);
  const MaxPrincipleReport b = max_principle_check(numeric(backward_function(src, fld, kSpec, kOde)), src, p2, 2.0);
  CHECK(b.pass);
  CHECK(b.ratio <= 2.0 * (1 + 1e-6));
  CHECK(b.ratio_over_T == doctest::Approx(b.ratio / 2.0));
}

TEST_CASE("pushforward") {
  const std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
  const std::size_t m = 4000;
  const ParticleEnsemble zeta = sample_ensemble(kSpec, m, 3);
  CHECK(zeta.size() == m);

  const Trajectory still = push_forward(zeta, make_field("zero(n=2)", 4, 1.0), kSpec, times, kOde);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < m; j += 97) CHECK((still.position(i, j, 4) - zeta.positions.col(static_cast<Eigen::Index>(j))).norm() == 0.0);
  }

  const Trajectory moved = push_forward(zeta, make_field("const(k=1, c=1)", 4, 1.0), kSpec, times, kOde);
  CHECK(moved.size() == m);
  const double mean0 = zeta.positions.row(0).mean();
  for (std::size_t i = 0; i < times.size(); ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += moved.position(i, j, 1)[0];
    mean /= m;
    CHECK(std::abs(mean - (mean0 + times[i])) <= 1e-9);
    CHECK(std::abs(mean - times[i]) <= 3 * std::sqrt(kSpec[0] / m));
  }

  const Trajectory decay = push_forward(zeta, make_field("decay(n=4, a=1)", 4, 1.0), kSpec, times, kOde);
  for (std::size_t i = 1; i < times.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      Eigen::ArrayXd sq(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) sq[static_cast<Eigen::Index>(j)] = std::pow(decay.position(i, j, 4)[static_cast<Eigen::Index>(k)], 2);
      const double se = std::sqrt((sq - sq.mean()).square().sum() / (m - 1.0) / m);
      CHECK(std::abs(sq.mean() - std::exp(-2 * times[i]) * kSpec[k]) <= 3 * se);
    }
  }
}

TEST_CASE("weak residual") {
  std::vector<double> times;
  for (int i = 0; i <= 64; ++i) times.push_back(i / 64.0);
  const ParticleEnsemble zeta = sample_ensemble(kSpec, 2000, 8);
  const CylinderFunction u = make_function("cos(k=1, tpow=2)", 1.0);

  const CylinderVectorField zero = make_field("zero(n=1)", 4, 1.0);
  const WeakResidual w0 = weak_residual(push_forward(zeta, zero, kSpec, times, kOde), u, zero);
  CHECK(std::abs(w0.value.value) <= 3 * (w0.value.std_error + w0.quadrature_bound) + 1e-12);

  const CylinderVectorField c = make_field("const(k=1, c=1)", 4, 1.0);
  const WeakResidual wc = weak_residual(push_forward(zeta, c, kSpec, times, kOde), u, c);
  CHECK(wc.pass);
  CHECK(std::abs(wc.value.value) <= 3 * (wc.value.std_error + wc.quadrature_bound));

  // frozen particles under F = e_1 with u = (T - t) x_1, so <c, Du> = T - t
  const CylinderFunction lin = make_function("coord(k=1, tpow=1)", 1.0);
  const WeakResidual frozen = weak_residual(frozen_trajectory(zeta, times), lin, c);
  CHECK(frozen.detected);
  CHECK(frozen.value.value == doctest::Approx(0.5).epsilon(1e-6));

  CHECK(kind_of([&] { weak_residual(frozen_trajectory(zeta, times), make_function("cos(k=1)", 1.0), c); }) ==
        ErrorKind::test_class);
  CHECK(kind_of([&] { weak_residual(frozen_trajectory(zeta, {0.0, 0.5, 0.75, 1.0}), u, c); }) == ErrorKind::config);
  CHECK(kind_of([&] { frozen_trajectory(zeta, {}); }) == ErrorKind::config);
}

TEST_CASE("range probe") {
  const Spectrum s = Spectrum::power_law(2.0, 4);
  const ExponentTriple e = ExponentTriple::make(4.0, 4.0, 2.0);
  const SampleBatch batch = sample_gaussian(s, 16, 5);
  RangeOptions opt;
  opt.outer_samples = 16;
  opt.time_grid = {0.0, 0.5, 1.0};

  const CylinderFunction f = make_function("cos(k=1, tpow=1)", 1.0);
  const CylinderVectorField based = make_field("rotanh(a=0.5)", 4, 1.0);
  const RangeProbe r = range_probe(f, based, s, 0.1, 2, batch, e, opt);
  CHECK(r.projection.value == 0.0);
  CHECK(r.total.value >= 0.0);

  const RangeProbe z = range_probe(make_function("const(c=0, tpow=1)", 1.0), based, s, 0.1, 2, batch, e, opt);
  CHECK(z.smoothing.value == 0.0);
  CHECK(z.projection.value == 0.0);
  CHECK(z.commutator.value == 0.0);
  CHECK(z.total.value == 0.0);

  CHECK(kind_of([&] { range_probe(make_function("cos(k=1)", 1.0), based, s, 0.1, 2, batch, e, opt); }) ==
        ErrorKind::test_class);
}
