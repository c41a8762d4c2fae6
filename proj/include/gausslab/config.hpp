#pragma once

// Experiment configuration: a flat INI-style file with one section per
// module. Every value remembers the line it came from so validation errors
// can point at it ("config:LINE: message"). See configs/reference.ini for
// the full schema with defaults.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gausslab/commutator.hpp"
#include "gausslab/ode.hpp"

namespace gausslab {

/// Raw key/value store with source lines. Keys are "section.key".
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for command-line overrides
  };

  static ConfigFile parse(const std::string& text, const std::string& source = "config");
  static ConfigFile load(const std::string& path);

  /// section.key=value; throws a config error on malformed input.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return entries_.contains(key); }
  const Entry* find(const std::string& key) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  /// "config:LINE: " or "override KEY: ".
  std::string where(const std::string& key) const;

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// A (function, field) selection written "u | F".
struct CatalogPair {
  std::string function;
  std::string field;
};

struct ExperimentConfig {
  // [spectrum]
  std::string family = "power-law";
  double gamma = 2.0;
  std::size_t n = 64;
  std::vector<double> values;
  // [run]
  std::uint64_t seed = 20261017;
  std::size_t samples = 200000;
  double horizon = 1.0;
  // [exponents]
  ExponentTriple exponents;
  // [semigroup]
  std::vector<double> semigroup_eps{0.01, 0.1, 1.0};
  std::vector<std::string> semigroup_functions;
  std::string smoothing_function = "sign(k=1)";
  std::vector<double> smoothing_eps;
  std::size_t smoothing_samples = 20000;
  std::size_t probes = 256;
  // [commutator]
  std::vector<double> commutator_eps{0.4, 0.2, 0.1, 0.05, 0.01};
  std::size_t xi_nodes = 33;
  std::vector<CatalogPair> commutator_pairs;
  CatalogPair linear_pair{"coord(k=1)", "const(k=1, c=1)"};
  std::vector<std::string> draw_functions;
  std::vector<std::string> draw_fields;
  std::size_t draws = 20;
  std::vector<double> draw_eps{0.05, 0.2, 1.0};
  std::size_t draw_samples = 100000;
  std::size_t outer_samples = 512;
  std::size_t decomposition_samples = 24;
  std::size_t sweep_time_nodes = 9;
  std::size_t inner_nodes = 8;
  std::vector<double> operator_eps{0.01, 0.05, 0.1, 0.5, 1.0};
  std::vector<double> operator_xi{0.01, 0.1, 0.25, 0.5, 1.0};
  // [identities]
  std::size_t identity_samples = 1000000;
  std::size_t identity_dim = 6;
  std::size_t random_forms = 10;
  std::size_t nonsymmetric_forms = 3;
  std::vector<double> identity_eps{0.1, 0.3};
  std::vector<std::string> divergence_fields;
  std::vector<double> divergence_p{1.5, 2.0, 3.0};
  // [transport]
  std::vector<CatalogPair> transport_pairs;
  std::size_t transport_probes = 64;
  ODEOptions ode;
  std::size_t particles = 20000;
  std::size_t trajectory_nodes = 65;
  std::vector<std::string> push_fields;
  std::vector<std::string> battery;
  std::string control_field = "const(k=1, c=1)";
  std::string range_source = "sin(k=1, tpow=1)";
  std::string range_field = "rotanh(a=0.5)";
  std::size_t range_dim = 2;
  std::vector<double> range_eps{0.4, 0.2, 0.1, 0.05, 0.01};
  std::size_t range_samples = 128;
  std::size_t range_time_nodes = 5;
  std::size_t range_nodes = 6;
  // [output]
  std::string output_dir = "results";

  /// Defaults with the reference catalog selections filled in.
  ExperimentConfig();
};

/// Typed view of a config file; validates every value and the cross-field
/// invariants (exponent relation, positive sorted eps grids, positive
/// counts, catalog entries that parse).
ExperimentConfig build_config(const ConfigFile& file);

}  // namespace gausslab
