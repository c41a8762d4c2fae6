#pragma once

// Verification suites. Each returns report rows; `run_command` orchestrates
// them and writes the files of a run.

#include <string>
#include <vector>

#include "gausslab/config.hpp"
#include "gausslab/report.hpp"
#include "gausslab/spectrum.hpp"

namespace gausslab {

Spectrum make_spectrum(const ExperimentConfig& config);

SuiteReport run_semigroup_suite(const ExperimentConfig& config);
SuiteReport run_commutator_suite(const ExperimentConfig& config);
SuiteReport run_identities_suite(const ExperimentConfig& config);
SuiteReport run_transport_suite(const ExperimentConfig& config);
SuiteReport run_range_suite(const ExperimentConfig& config);

enum class Command { verify, commutator_sweep, identities, transport, range_probe };

struct RunResult {
  std::vector<SuiteReport> suites;
  bool pass = false;
};

/// Runs the suites of a command and writes them under config.output_dir.
/// `verify` writes semigroup, commutator, identities and transport CSVs
/// (range-probe rows go with transport); the single-suite commands write
/// their own CSV (range-probe writes range.csv).
RunResult run_command(Command command, const ExperimentConfig& config);

/// Lines describing the configuration, first lines of summary.txt.
std::vector<std::string> describe(const ExperimentConfig& config);

}  // namespace gausslab
