#include "gausslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "gausslab/catalog.hpp"
#include "gausslab/error.hpp"

namespace gausslab {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::set<std::string> kSections = {"spectrum", "run", "exponents", "semigroup",
                                         "commutator", "identities", "transport", "output"};

// Typed parsing with the location prefix attached to every failure.
struct Reader {
  const ConfigFile& file;

  [[noreturn]] void error(const std::string& key, const std::string& msg) const {
    fail(ErrorKind::config, file.where(key) + msg);
  }

  double number(const std::string& key, const std::string& text) const {
    double v = 0.0;
    const std::string t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
      error(key, "'" + t + "' is not a number");
    }
    return v;
  }

  std::size_t count(const std::string& key, const std::string& text) const {
    const double v = number(key, text);
    if (v < 1 || v != std::floor(v) || v > 1e12) error(key, "expected a positive integer, got '" + trim(text) + "'");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> numbers(const std::string& key, const std::string& text) const {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(number(key, item));
    if (out.empty()) error(key, "empty list");
    return out;
  }

  std::vector<double> eps_grid(const std::string& key, const std::string& text) const {
    std::vector<double> out = numbers(key, text);
    for (double e : out) {
      if (!(e > 0.0)) error(key, "eps values must be positive");
    }
    const bool up = std::is_sorted(out.begin(), out.end(), std::less<>());
    const bool down = std::is_sorted(out.begin(), out.end(), std::greater<>());
    if (!(up || down) || std::adjacent_find(out.begin(), out.end()) != out.end()) {
      error(key, "eps grid must be sorted without repeats");
    }
    return out;
  }

  std::vector<std::string> entries(const std::string& key, const std::string& text, bool field) const {
    std::vector<std::string> out = split(text, ';');
    if (out.empty()) error(key, "empty catalog list");
    for (const auto& e : out) check_entry(key, e, field);
    return out;
  }

  void check_entry(const std::string& key, const std::string& text, bool field) const {
    try {
      if (field) make_field(text, 64, 1.0);
      else make_function(text, 1.0);
    } catch (const Error& e) {
      error(key, e.what());
    }
  }

  std::vector<CatalogPair> pairs(const std::string& key, const std::string& text) const {
    std::vector<CatalogPair> out;
    for (const auto& item : split(text, ';')) out.push_back(pair(key, item));
    if (out.empty()) error(key, "empty pair list");
    return out;
  }

  CatalogPair pair(const std::string& key, const std::string& text) const {
    const auto bar = text.find('|');
    if (bar == std::string::npos) error(key, "expected 'function | field', got '" + trim(text) + "'");
    CatalogPair p{trim(text.substr(0, bar)), trim(text.substr(bar + 1))};
    check_entry(key, p.function, false);
    check_entry(key, p.field, true);
    return p;
  }
};

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile file;
  file.source_ = source;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  auto error = [&](const std::string& msg) {
    fail(ErrorKind::config, source + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') error("unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!kSections.contains(section)) error("unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) error("expected key = value");
    if (section.empty()) error("key outside of any section");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (key.empty()) error("empty key");
    const std::string full = section + "." + key;
    if (file.entries_.contains(full)) error("duplicate key '" + full + "'");
    file.entries_[full] = {trim(std::string_view(s).substr(eq + 1)), line};
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, path + ":0: cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

void ConfigFile::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string key = trim(std::string_view(assignment).substr(0, eq));
  const auto dot = key.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
    fail(ErrorKind::config, "override '" + assignment + "': expected section.key=value");
  }
  if (!kSections.contains(key.substr(0, dot))) {
    fail(ErrorKind::config, "override '" + assignment + "': unknown section [" + key.substr(0, dot) + "]");
  }
  entries_[key] = {trim(std::string_view(assignment).substr(eq + 1)), 0};
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::where(const std::string& key) const {
  const Entry* e = find(key);
  if (e && e->line == 0) return "override " + key + ": ";
  return source_ + ":" + std::to_string(e ? e->line : 0) + ": ";
}

ExperimentConfig::ExperimentConfig() {
  semigroup_functions = {"cos(k=1)", "sin(k=2, phase=0.3)", "tanh(k=1, scale=2)",
                         "gauss(k=1)", "wave(a1=1, a2=0.5)", "cossin(k1=1, k2=2)"};
  smoothing_eps = {0.001, 0.00316, 0.01, 0.0316, 0.1, 0.316, 1.0};
  commutator_pairs = {{"cos(k=1)", "rotanh(a=0.5)"},
                      {"wave(a1=1, a2=1)", "sinfield(n=2, a=0.5)"},
                      {"tanh(k=2)", "tanhmix(a=0.5)"},
                      {"gauss(k=1)", "bump(k=1, n=2, radius=2)"}};
  draw_functions = {"cos(k=1)", "sin(k=2, phase=0.3)", "tanh(k=1, scale=2)", "gauss(k=2)",
                    "wave(a1=1, a2=0.5)", "cossin(k1=1, k2=2)"};
  draw_fields = {"rotanh(a=0.5)", "sinfield(n=2, a=0.5)", "tanhmix(a=0.5)", "bump(k=1, n=2, radius=2)",
                 "swirl(radius=2)", "const(k=2, c=1)"};
  divergence_fields = {"bump(k=1, n=2, radius=2)", "bump(k=2, n=2, radius=1.5, a=0.5)", "swirl(radius=2)",
                       "swirl(radius=1, a=2)", "bump(k=1, n=3, radius=3)"};
  transport_pairs = {{"const(c=1)", "const(k=1, c=1)"},
                     {"coord(k=1)", "zero(n=1)"},
                     {"sin(k=1, tpow=1)", "rotanh(a=0.5)"},
                     {"cos(k=2, tpow=2)", "tanhmix(a=0.5)"},
                     {"wave(a1=1, a2=0.5)", "sinfield(n=2, a=0.3, tmod=0.5)"}};
  push_fields = {"const(k=1, c=1)", "rotanh(a=0.5, tmod=0.5)"};
  battery = {"cos(k=1, tpow=1)",         "sin(k=1, tpow=1)",          "sin(k=1, freq=2, tpow=2)",
             "tanh(k=1, tpow=1)",        "gauss(k=1, tpow=1)",        "wave(a1=1, a2=0.5, tpow=1)",
             "cossin(k1=1, k2=2, tpow=2)", "sin(k=2, tpow=1)",        "tanh(k=2, scale=2, tpow=1.5)",
             "const(c=1, tpow=1)",       "cos(k=1, freq=0.5, tpow=3)", "gauss(k=2, width=0.7, tpow=1)"};
  ode.rel_tol = 1e-8;
  ode.abs_tol = 1e-10;
}

ExperimentConfig build_config(const ConfigFile& file) {
  ExperimentConfig c;
  const Reader rd{file};
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  auto num = [&](double& target) -> Setter {
    return [&](const std::string& k, const std::string& v) { target = rd.number(k, v); };
  };
  auto cnt = [&](std::size_t& target) -> Setter {
    return [&](const std::string& k, const std::string& v) { target = rd.count(k, v); };
  };
  auto grid = [&](std::vector<double>& target) -> Setter {
    return [&](const std::string& k, const std::string& v) { target = rd.eps_grid(k, v); };
  };
  auto list = [&](std::vector<double>& target) -> Setter {
    return [&](const std::string& k, const std::string& v) { target = rd.numbers(k, v); };
  };
  auto funcs = [&](std::vector<std::string>& target, bool field) -> Setter {
    return [&, field](const std::string& k, const std::string& v) { target = rd.entries(k, v, field); };
  };
  auto entry = [&](std::string& target, bool field) -> Setter {
    return [&, field](const std::string& k, const std::string& v) {
      rd.check_entry(k, v, field);
      target = v;
    };
  };
  auto pairs = [&](std::vector<CatalogPair>& target) -> Setter {
    return [&](const std::string& k, const std::string& v) { target = rd.pairs(k, v); };
  };
  double p = c.exponents.p, r = c.exponents.r, s = c.exponents.s;

  const std::map<std::string, Setter> setters = {
      {"spectrum.family",
       [&](const std::string& k, const std::string& v) {
         if (v != "power-law" && v != "explicit") rd.error(k, "family must be 'power-law' or 'explicit'");
         c.family = v;
       }},
      {"spectrum.gamma", num(c.gamma)},
      {"spectrum.n", cnt(c.n)},
      {"spectrum.values", list(c.values)},
      {"run.seed",
       [&](const std::string& k, const std::string& v) {
         std::uint64_t seed = 0;
         auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
         if (ec != std::errc() || ptr != v.data() + v.size()) rd.error(k, "seed must be a non-negative integer");
         c.seed = seed;
       }},
      {"run.samples", cnt(c.samples)},
      {"run.horizon", num(c.horizon)},
      {"exponents.p", num(p)},
      {"exponents.r", num(r)},
      {"exponents.s", num(s)},
      {"semigroup.eps", grid(c.semigroup_eps)},
      {"semigroup.functions", funcs(c.semigroup_functions, false)},
      {"semigroup.smoothing_function", entry(c.smoothing_function, false)},
      {"semigroup.smoothing_eps", grid(c.smoothing_eps)},
      {"semigroup.smoothing_samples", cnt(c.smoothing_samples)},
      {"semigroup.probes", cnt(c.probes)},
      {"commutator.eps", grid(c.commutator_eps)},
      {"commutator.xi_nodes", cnt(c.xi_nodes)},
      {"commutator.pairs", pairs(c.commutator_pairs)},
      {"commutator.linear_pair",
       [&](const std::string& k, const std::string& v) { c.linear_pair = rd.pair(k, v); }},
      {"commutator.draw_functions", funcs(c.draw_functions, false)},
      {"commutator.draw_fields", funcs(c.draw_fields, true)},
      {"commutator.draws", cnt(c.draws)},
      {"commutator.draw_eps", grid(c.draw_eps)},
      {"commutator.draw_samples", cnt(c.draw_samples)},
      {"commutator.outer_samples", cnt(c.outer_samples)},
      {"commutator.decomposition_samples", cnt(c.decomposition_samples)},
      {"commutator.time_nodes", cnt(c.sweep_time_nodes)},
      {"commutator.inner_nodes", cnt(c.inner_nodes)},
      {"commutator.operator_eps", grid(c.operator_eps)},
      {"commutator.operator_xi", grid(c.operator_xi)},
      {"identities.samples", cnt(c.identity_samples)},
      {"identities.dim", cnt(c.identity_dim)},
      {"identities.random_forms", cnt(c.random_forms)},
      {"identities.nonsymmetric_forms", cnt(c.nonsymmetric_forms)},
      {"identities.eps", grid(c.identity_eps)},
      {"identities.divergence_fields", funcs(c.divergence_fields, true)},
      {"identities.divergence_p", list(c.divergence_p)},
      {"transport.pairs", pairs(c.transport_pairs)},
      {"transport.probes", cnt(c.transport_probes)},
      {"transport.rel_tol", num(c.ode.rel_tol)},
      {"transport.abs_tol", num(c.ode.abs_tol)},
      {"transport.max_step", num(c.ode.max_step)},
      {"transport.particles", cnt(c.particles)},
      {"transport.time_nodes", cnt(c.trajectory_nodes)},
      {"transport.push_fields", funcs(c.push_fields, true)},
      {"transport.battery", funcs(c.battery, false)},
      {"transport.control_field", entry(c.control_field, true)},
      {"transport.range_source", entry(c.range_source, false)},
      {"transport.range_field", entry(c.range_field, true)},
      {"transport.range_dim", cnt(c.range_dim)},
      {"transport.range_eps", grid(c.range_eps)},
      {"transport.range_samples", cnt(c.range_samples)},
      {"transport.range_time_nodes", cnt(c.range_time_nodes)},
      {"transport.range_nodes", cnt(c.range_nodes)},
      {"output.dir",
       [&](const std::string& k, const std::string& v) {
         if (v.empty()) rd.error(k, "empty output directory");
         c.output_dir = v;
       }},
  };

  for (const auto& [key, e] : file.entries()) {
    auto it = setters.find(key);
    if (it == setters.end()) rd.error(key, "unknown key '" + key + "'");
    it->second(key, e.value);
  }

  // Cross-field checks, anchored at the most specific line available.
  try {
    c.exponents = ExponentTriple::make(p, r, s);
  } catch (const Error& e) {
    const std::string key = file.has("exponents.s") ? "exponents.s" : file.has("exponents.r") ? "exponents.r" : "exponents.p";
    rd.error(key, e.what());
  }
  if (c.family == "power-law") {
    if (!(c.gamma > 0.0)) rd.error("spectrum.gamma", "gamma must be positive");
    if (file.has("spectrum.values")) rd.error("spectrum.values", "values are only used with family = explicit");
  } else {
    if (c.values.empty()) rd.error("spectrum.family", "explicit family needs spectrum.values");
    if (file.has("spectrum.n") && c.n != c.values.size()) rd.error("spectrum.n", "n does not match the number of values");
    c.n = c.values.size();
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      if (!(c.values[k] > 0.0)) rd.error("spectrum.values", "eigenvalues must be positive");
      if (k > 0 && c.values[k] > c.values[k - 1]) rd.error("spectrum.values", "eigenvalues must be non-increasing");
    }
  }
  if (!(c.horizon > 0.0)) rd.error("run.horizon", "horizon must be positive");
  if (c.xi_nodes < 2) rd.error("commutator.xi_nodes", "need at least 2 nodes");
  if (c.inner_nodes < 2 || c.inner_nodes > 20) rd.error("commutator.inner_nodes", "Gauss-Hermite nodes must lie in [2, 20]");
  if (c.range_nodes < 2 || c.range_nodes > 20) rd.error("transport.range_nodes", "Gauss-Hermite nodes must lie in [2, 20]");
  if (c.sweep_time_nodes < 2) rd.error("commutator.time_nodes", "need at least 2 time nodes");
  if (c.range_time_nodes < 2) rd.error("transport.range_time_nodes", "need at least 2 time nodes");
  if (c.trajectory_nodes < 3 || c.trajectory_nodes % 2 == 0) {
    rd.error("transport.time_nodes", "trajectory grid needs an odd number (>= 3) of nodes");
  }
  for (double xi : c.operator_xi) {
    if (xi > 1.0) rd.error("commutator.operator_xi", "xi must lie in (0, 1]");
  }
  for (double pv : c.divergence_p) {
    if (!(pv > 1.0)) rd.error("identities.divergence_p", "p must be > 1");
  }
  if (c.identity_dim > c.n) rd.error("identities.dim", "dimension exceeds the truncation n");
  if (c.range_dim > c.n) rd.error("transport.range_dim", "dimension exceeds the truncation n");
  if (c.samples < 2) rd.error("run.samples", "need at least 2 samples");
  try {
    c.ode.validate();
  } catch (const Error& e) {
    rd.error("transport.rel_tol", e.what());
  }
  return c;
}

}  // namespace gausslab
