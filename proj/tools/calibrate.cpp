// One-time calibration of the constants in include/gausslab/calibration.hpp.
// Runs on its own seed and a catalog wider than the reference selection,
// prints the largest observed ratios and the 1.1x margins to freeze.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausslab/calculus.hpp"
#include "gausslab/catalog.hpp"
#include "gausslab/commutator.hpp"
#include "gausslab/identities.hpp"
#include "gausslab/rng.hpp"

using namespace gausslab;

int main(int argc, char** argv) {
  CLI::App app{"calibrate the frozen constants"};
  std::uint64_t seed = 7;
  std::size_t samples = 200000;
  std::size_t outer = 512;
  app.add_option("--seed", seed, "calibration seed");
  app.add_option("--samples", samples, "samples for the divergence ratios");
  app.add_option("--outer", outer, "outer samples for the commutator sweeps");
  CLI11_PARSE(app, argc, argv);

  const Spectrum spectrum = Spectrum::power_law(2.0, 64);
  const double margin = 1.1;

  // operator bound: scan a wide (eps, xi) grid
  double op = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double eps = 1e-4 * std::pow(10.0, i / 10.0);
    for (int j = 0; j <= 40; ++j) {
      const double xi = std::pow(10.0, -j / 10.0);
      op = std::max(op, operator_bound_check(spectrum, eps, xi, 1.0).scaled);
    }
  }
  std::printf("operator bound: sup eps sqrt(xi) sup_k = %.6g -> %.6g\n", op, margin * op);

  // commutator bound
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"cos(k=1)", "rotanh(a=0.5)"},          {"wave(a1=1, a2=1)", "sinfield(n=2, a=0.5)"},
      {"tanh(k=2)", "tanhmix(a=0.5)"},        {"gauss(k=1)", "bump(k=1, n=2, radius=2)"},
      {"sin(k=1, freq=2)", "rotanh(a=1)"},    {"cossin(k1=1, k2=2)", "swirl(radius=2)"},
      {"tanh(k=1, scale=3)", "tanhmix(a=1)"}, {"gauss(k=2, width=0.5)", "sinfield(n=3, a=1)"},
  };
  const ExponentTriple ex;
  const std::vector<double> eps_grid = {1.0, 0.4, 0.2, 0.1, 0.05, 0.01, 0.003};
  const std::vector<double> grid = uniform_grid(1.0, 9);
  const SampleBatch batch = sample_gaussian(spectrum.leading(3), outer, derive_seed(seed, 1));
  SweepOptions options;
  options.inner = GaussHermite{8, 6, 256, derive_seed(seed, 2)};
  options.decomposition_samples = 0;
  double comm = 0.0;
  for (const auto& [us, fs] : pairs) {
    const CylinderFunction u = make_function(us, 1.0);
    const CylinderVectorField f = make_field(fs, spectrum.dim(), 1.0);
    const CommutatorSweep sw = norm_sweep(u, f, spectrum, ex, eps_grid, batch, grid, options);
    for (const auto& p : sw.points) comm = std::max(comm, p.ratio);
    std::printf("  %s | %s: max ratio %.6g\n", us.c_str(), fs.c_str(),
                std::max_element(sw.points.begin(), sw.points.end(),
                                 [](const SweepPoint& a, const SweepPoint& b) { return a.ratio < b.ratio; })
                    ->ratio);
  }
  std::printf("commutator bound: max ratio = %.6g -> %.6g\n", comm, margin * comm);

  // divergence bound
  const std::vector<std::string> fields = {
      "bump(k=1, n=2, radius=2)", "bump(k=2, n=2, radius=1.5, a=0.5)", "swirl(radius=2)", "swirl(radius=1, a=2)",
      "bump(k=1, n=3, radius=3)", "bump(k=1, n=1, radius=0.5)",         "swirl(radius=3, a=0.5)",
      "bump(k=3, n=3, radius=1, a=3)",
  };
  for (double p : {1.5, 2.0, 3.0}) {
    double worst = 0.0;
    std::uint64_t index = 0;
    for (const auto& fs : fields) {
      const CylinderVectorField g = make_field(fs, spectrum.dim(), 1.0);
      const SampleBatch b = sample_gaussian(spectrum.leading(g.base_dim()), samples, derive_seed(seed, 100 + index++));
      worst = std::max(worst, divq_lp_probe(g, spectrum, p, b).ratio);
    }
    std::printf("divergence bound p=%g: max ratio = %.6g -> %.6g\n", p, worst, margin * worst);
  }
  return 0;
}
