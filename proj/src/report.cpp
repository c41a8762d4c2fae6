#include "gausslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gausslab/error.hpp"

namespace gausslab {

std::string to_string(Relation relation) {
  switch (relation) {
    case Relation::le: return "le";
    case Relation::abs_le: return "abs_le";
    case Relation::ge: return "ge";
    case Relation::abs_ge: return "abs_ge";
    case Relation::info: return "info";
  }
  return "info";
}

bool holds(Relation relation, double estimate, double bound) {
  switch (relation) {
    case Relation::le: return estimate <= bound;
    case Relation::abs_le: return std::abs(estimate) <= bound;
    case Relation::ge: return estimate >= bound;
    case Relation::abs_ge: return std::abs(estimate) >= bound;
    case Relation::info: return true;
  }
  return false;
}

ReportRow ReportRow::check(std::string id, std::string quantity, double estimate, double std_error, double bound,
                           Relation relation) {
  ReportRow row;
  row.experiment_id = std::move(id);
  row.quantity = std::move(quantity);
  row.estimate = estimate;
  row.std_error = std_error;
  row.bound = bound;
  row.relation = relation;
  // NaN anywhere fails the comparison, which is what we want
  row.pass = holds(relation, estimate, bound);
  return row;
}

ReportRow ReportRow::info(std::string id, std::string quantity, double estimate, double std_error) {
  ReportRow row = check(std::move(id), std::move(quantity), estimate, std_error, 0.0, Relation::info);
  row.bound = std::nan("");
  return row;
}

bool SuiteReport::pass() const {
  for (const auto& r : rows) {
    if (!r.pass) return false;
  }
  return true;
}

void SuiteReport::certify(const std::string& property, const std::string& prefix) {
  std::size_t count = 0;
  bool ok = true;
  for (const auto& r : rows) {
    if (r.experiment_id.compare(0, prefix.size(), prefix) != 0) continue;
    ++count;
    ok = ok && r.pass;
  }
  certified.push_back(property + ": " + (count > 0 && ok ? "PASS" : "FAIL") + " (" + std::to_string(count) +
                      " rows)");
}

void SuiteReport::append(const SuiteReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  certified.insert(certified.end(), other.certified.begin(), other.certified.end());
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
  wall_time += other.wall_time;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

// Quote a field only when it needs it.
std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string csv_header() { return "experiment_id,quantity,estimate,std_error,bound,relation,pass\n"; }

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) {
    out += csv_field(r.experiment_id) + ',' + csv_field(r.quantity) + ',' + format_number(r.estimate) + ',' +
           format_number(r.std_error) + ',' + format_number(r.bound) + ',' + to_string(r.relation) + ',' +
           (r.pass ? "true" : "false") + '\n';
  }
  return out;
}

std::string summary_text(const std::vector<SuiteReport>& suites, const std::vector<std::string>& preamble) {
  std::ostringstream out;
  for (const auto& line : preamble) out << line << '\n';
  bool all = true;
  std::size_t rows = 0, failed = 0, properties = 0;
  for (const auto& s : suites) {
    all = all && s.pass();
    rows += s.rows.size();
    for (const auto& r : s.rows) failed += r.pass ? 0 : 1;
  }
  out << "\nresult: " << (all ? "PASS" : "FAIL") << " (" << rows << " rows, " << failed << " failed)\n";
  out << "\ncertified properties:\n";
  for (const auto& s : suites) {
    for (const auto& c : s.certified) {
      out << "  [" << s.name << "] " << c << '\n';
      ++properties;
    }
  }
  out << "  total: " << properties << '\n';
  for (const auto& s : suites) {
    if (s.notes.empty()) continue;
    out << "\nnotes (" << s.name << "):\n";
    for (const auto& n : s.notes) out << "  - " << n << '\n';
  }
  bool header = false;
  for (const auto& s : suites) {
    for (const auto& r : s.rows) {
      if (r.pass) continue;
      if (!header) out << "\nfailed rows:\n";
      header = true;
      out << "  " << r.experiment_id << " " << r.quantity << ": " << format_number(r.estimate) << " "
          << to_string(r.relation) << " " << format_number(r.bound) << '\n';
    }
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::config, "cannot write " + path.string());
  out << text;
}

}  // namespace

void write_reports(const std::filesystem::path& dir, const std::vector<SuiteReport>& suites,
                   const std::vector<std::string>& preamble) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::config, "cannot create output directory " + dir.string() + ": " + ec.message());
  std::string timings = "suite,experiment_id,quantity,wall_time\n";
  for (const auto& s : suites) {
    write_file(dir / (s.name + ".csv"), to_csv(s.rows));
    for (const auto& r : s.rows) {
      timings += s.name + ',' + csv_field(r.experiment_id) + ',' + csv_field(r.quantity) + ',' +
                 format_number(r.wall_time) + '\n';
    }
    timings += s.name + ",total,," + format_number(s.wall_time) + '\n';
  }
  write_file(dir / "summary.txt", summary_text(suites, preamble));
  write_file(dir / "timings.csv", timings);
}

}  // namespace gausslab
