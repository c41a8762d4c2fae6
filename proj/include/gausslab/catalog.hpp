#pragma once

// Named catalog of parametric test functions and drifts. Experiment configs
// select entries with strings of the form  name(key=value, ...),  e.g.
// "cos(k=1, freq=2)" or "rotanh(a=0.5)". Coordinates are 1-based.
//
// Functions (all accept tpow=p >= 1 to multiply by (T - t)^p, making the
// entry an element of D_T, and amp=c to scale it):
//   const(c)            c                                  bounded
//   coord(k)            x_k                                unbounded
//   square(k)           x_k^2                              unbounded
//   sign(k)             sign(x_k)                          bounded, not C^1
//   cos(k, freq)        cos(freq x_k)                      bounded
//   sin(k, freq, phase) sin(freq x_k + phase)              bounded
//   tanh(k, scale)      tanh(scale x_k)                    bounded
//   gauss(k, width)     exp(-x_k^2 / (2 width^2))          bounded
//   wave(a1, a2)        sin(a1 x_1 + a2 x_2)               bounded
//   cossin(k1, k2)      cos(x_k1) sin(x_k2)                bounded
//
// Fields (all accept tmod=a for a (1 + a sin(2 pi t / T)) time profile):
//   zero(n)                  0                              bounded
//   const(k, c)              c e_k                          bounded
//   linear(k, a)             a x_k e_k                      unbounded
//   decay(n, a)              -a (x_1..x_n)                  unbounded
//   shear(i, j, a)           a x_j e_i                      unbounded
//   rotanh(a)                a (tanh x_2, -tanh x_1)        bounded
//   sinfield(n, a)           g_i = a sin(x_{i+1} + i)       bounded
//   tanhmix(a)               a (tanh(x_1 + x_2), tanh(x_1 - x_2)) bounded
//   bump(k, n, radius, a)    a phi(x) e_k                   compact support
//   swirl(radius, a)         a phi(x) (-x_2, x_1)           compact support
// where phi(x) = (1 - |x|^2 / radius^2)_+^3 over the base coordinates.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gausslab/cylinder.hpp"

namespace gausslab {

struct CatalogEntry {
  std::string name;
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const;
  std::string to_string() const;
};

/// Parses "name(key=value, ...)"; throws a config error on malformed input.
CatalogEntry parse_catalog_entry(std::string_view text);

/// Splits a ';'-separated list of catalog entries.
std::vector<CatalogEntry> parse_catalog_list(std::string_view text);

CylinderFunction make_function(const CatalogEntry& entry, double horizon);
CylinderFunction make_function(std::string_view text, double horizon);

/// `ambient_dim` is the truncation dimension n (used by decay with no n).
CylinderVectorField make_field(const CatalogEntry& entry, std::size_t ambient_dim, double horizon);
CylinderVectorField make_field(std::string_view text, std::size_t ambient_dim, double horizon);

}  // namespace gausslab
