// gausslab: batch runner for the verification suites.
//
//   gausslab verify --config configs/reference.ini --out results
//   gausslab commutator-sweep --override commutator.eps=0.4,0.1,0.01
//
// Exit status: 0 all checks pass, 1 a suite check failed (or a numerical
// error stopped the run), 2 invalid configuration or command line.
// GAUSSLAB_WORKERS sets the worker count.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausslab/config.hpp"
#include "gausslab/error.hpp"
#include "gausslab/suites.hpp"

using namespace gausslab;

int main(int argc, char** argv) {
  CLI::App app{"Gaussian OU semigroup, commutator and transport verification suites"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seed;
  app.add_option("--config", config_path, "config file (default: built-in reference configuration)");
  app.add_option("--seed", seed, "base seed (overrides run.seed)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--override", overrides, "section.key=value, repeatable")->take_all();

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const std::vector<Sub> subs = {
      {"verify", "run every suite", Command::verify},
      {"commutator-sweep", "commutator representation, L^p' sweep and operator bound", Command::commutator_sweep},
      {"identities", "Gaussian quadratic-form identities and the divergence bound", Command::identities},
      {"transport", "backward transport solutions and particle pushforwards", Command::transport},
      {"range-probe", "range condition probe along the eps refinement path", Command::range_probe},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Command command = Command::verify;
  for (const auto& s : subs) {
    if (app.got_subcommand(s.name)) command = s.command;
  }

  ExperimentConfig config;
  try {
    ConfigFile file = config_path.empty() ? ConfigFile::parse("", "reference") : ConfigFile::load(config_path);
    for (const auto& o : overrides) file.apply_override(o);
    if (!seed.empty()) file.apply_override("run.seed=" + seed);
    if (!out_dir.empty()) file.apply_override("output.dir=" + out_dir);
    config = build_config(file);
  } catch (const Error& e) {
    std::cerr << "gausslab: " << e.what() << '\n';
    return 2;
  }

  try {
    const RunResult result = run_command(command, config);
    for (const auto& suite : result.suites) {
      std::size_t failed = 0;
      for (const auto& r : suite.rows) failed += r.pass ? 0 : 1;
      std::printf("%-11s %s  %zu rows, %zu failed, %.1f s\n", suite.name.c_str(), suite.pass() ? "PASS" : "FAIL",
                  suite.rows.size(), failed, suite.wall_time);
    }
    std::printf("reports written to %s\n", config.output_dir.c_str());
    return result.pass ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "gausslab: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "gausslab: " << e.what() << '\n';
    return 1;
  }
}
