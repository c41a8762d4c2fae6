#pragma once

// Report rows and the files written per run.
//
// CSV columns, in order:
//   experiment_id,quantity,estimate,std_error,bound,relation,pass
// Numbers are printed with 17 significant digits. `relation` states the
// check that produced `pass`:
//   le      estimate <= bound
//   abs_le  |estimate| <= bound
//   ge      estimate >= bound
//   abs_ge  |estimate| >= bound
//   info    recorded only, always passes
// Wall times are kept out of the CSVs (they would break byte-for-byte
// reproducibility) and go to timings.csv.

#include <filesystem>
#include <string>
#include <vector>

namespace gausslab {

enum class Relation { le, abs_le, ge, abs_ge, info };

std::string to_string(Relation relation);
bool holds(Relation relation, double estimate, double bound);

struct ReportRow {
  std::string experiment_id;
  std::string quantity;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  Relation relation = Relation::info;
  bool pass = true;
  double wall_time = 0.0;

  static ReportRow check(std::string id, std::string quantity, double estimate, double std_error, double bound,
                         Relation relation);
  static ReportRow info(std::string id, std::string quantity, double estimate, double std_error = 0.0);
};

struct SuiteReport {
  std::string name;  // file stem of the CSV
  std::vector<ReportRow> rows;
  std::vector<std::string> certified;  // "property: PASS|FAIL" lines for the summary
  std::vector<std::string> notes;
  double wall_time = 0.0;

  bool pass() const;
  void add(ReportRow row) { rows.push_back(std::move(row)); }
  /// Appends a summary line for a property that holds iff every row whose
  /// id starts with `prefix` passes (and at least one exists).
  void certify(const std::string& property, const std::string& prefix);
  void append(const SuiteReport& other);
};

std::string format_number(double value);
std::string csv_header();
std::string to_csv(const std::vector<ReportRow>& rows);

/// Deterministic summary of the suites (no timings).
std::string summary_text(const std::vector<SuiteReport>& suites, const std::vector<std::string>& preamble);

/// <dir>/<name>.csv per suite, summary.txt and timings.csv.
void write_reports(const std::filesystem::path& dir, const std::vector<SuiteReport>& suites,
                   const std::vector<std::string>& preamble);

}  // namespace gausslab
