#include "gausslab/catalog.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "gausslab/error.hpp"

namespace gausslab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view context) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    fail(ErrorKind::config, "bad number '" + std::string(text) + "' in '" + std::string(context) + "'");
  }
  return value;
}

void check_keys(const CatalogEntry& e, std::set<std::string> allowed) {
  for (const auto& [key, value] : e.params) {
    if (!allowed.contains(key)) {
      fail(ErrorKind::config, "unknown parameter '" + key + "' for catalog entry '" + e.name + "'");
    }
  }
}

std::size_t coordinate(const CatalogEntry& e, const std::string& key, double fallback) {
  const double v = e.get(key, fallback);
  if (v < 1 || v != std::floor(v) || v > 1e6) {
    fail(ErrorKind::config, "parameter '" + key + "' of '" + e.name + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

Eigen::Index ix(std::size_t k) { return static_cast<Eigen::Index>(k); }

CylinderFunction single_coordinate(std::string name, std::size_t k, bool bounded,
                                   std::function<double(double)> f,
                                   std::function<double(double)> df) {
  CylinderFunction::Parts p;
  p.base_dim = k;
  const auto i = ix(k - 1);
  p.value = [f, i](double, ConstVectorRef x) { return f(x[i]); };
  if (df) {
    p.gradient = [df, i](double, ConstVectorRef x, VectorRef out) {
      out.setZero();
      out[i] = df(x[i]);
    };
  }
  p.bounded = bounded;
  p.name = std::move(name);
  return CylinderFunction(std::move(p));
}

double bump_profile(double r2, double radius2) {
  const double s = 1.0 - r2 / radius2;
  return s > 0.0 ? s * s * s : 0.0;
}

// d phi / d x_j = -6 x_j / R^2 (1 - r^2/R^2)^2
double bump_slope(double r2, double radius2) {
  const double s = 1.0 - r2 / radius2;
  return s > 0.0 ? -6.0 * s * s / radius2 : 0.0;
}

}  // namespace

double CatalogEntry::get(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string CatalogEntry::to_string() const {
  std::ostringstream out;
  out << name;
  if (!params.empty()) {
    out << '(';
    bool first = true;
    for (const auto& [key, value] : params) {
      out << (first ? "" : ",") << key << '=' << value;
      first = false;
    }
    out << ')';
  }
  return out.str();
}

CatalogEntry parse_catalog_entry(std::string_view text) {
  const std::string_view whole = trim(text);
  CatalogEntry entry;
  const auto open = whole.find('(');
  if (open == std::string_view::npos) {
    entry.name = std::string(whole);
  } else {
    if (whole.back() != ')') fail(ErrorKind::config, "missing ')' in '" + std::string(whole) + "'");
    entry.name = std::string(trim(whole.substr(0, open)));
    std::string_view args = whole.substr(open + 1, whole.size() - open - 2);
    while (!trim(args).empty()) {
      const auto comma = args.find(',');
      std::string_view item = trim(args.substr(0, comma));
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        fail(ErrorKind::config, "expected key=value, got '" + std::string(item) + "'");
      }
      const std::string key(trim(item.substr(0, eq)));
      if (key.empty()) fail(ErrorKind::config, "empty parameter name in '" + std::string(whole) + "'");
      if (entry.params.contains(key)) fail(ErrorKind::config, "duplicate parameter '" + key + "'");
      entry.params[key] = parse_number(item.substr(eq + 1), whole);
      if (comma == std::string_view::npos) break;
      args.remove_prefix(comma + 1);
    }
  }
  if (entry.name.empty()) fail(ErrorKind::config, "empty catalog entry");
  for (char c : entry.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      fail(ErrorKind::config, "bad catalog name '" + entry.name + "'");
    }
  }
  return entry;
}

std::vector<CatalogEntry> parse_catalog_list(std::string_view text) {
  std::vector<CatalogEntry> out;
  while (true) {
    const auto semi = text.find(';');
    const auto item = trim(text.substr(0, semi));
    if (!item.empty()) out.push_back(parse_catalog_entry(item));
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  if (out.empty()) fail(ErrorKind::config, "empty catalog list");
  return out;
}

CylinderFunction make_function(const CatalogEntry& e, double horizon) {
  const std::string& n = e.name;
  CylinderFunction u = [&]() -> CylinderFunction {
    if (n == "const") {
      check_keys(e, {"c", "tpow", "amp"});
      const double c = e.get("c", 1.0);
      CylinderFunction::Parts p;
      p.base_dim = 1;
      p.value = [c](double, ConstVectorRef) { return c; };
      p.gradient = [](double, ConstVectorRef, VectorRef out) { out.setZero(); };
      p.name = e.to_string();
      return CylinderFunction(std::move(p));
    }
    if (n == "coord") {
      check_keys(e, {"k", "tpow", "amp"});
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), false,
                               [](double v) { return v; }, [](double) { return 1.0; });
    }
    if (n == "square") {
      check_keys(e, {"k", "tpow", "amp"});
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), false,
                               [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
    }
    if (n == "sign") {
      check_keys(e, {"k", "tpow", "amp"});
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), true,
                               [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }, {});
    }
    if (n == "cos") {
      check_keys(e, {"k", "freq", "tpow", "amp"});
      const double w = e.get("freq", 1.0);
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), true,
                               [w](double v) { return std::cos(w * v); },
                               [w](double v) { return -w * std::sin(w * v); });
    }
    if (n == "sin") {
      check_keys(e, {"k", "freq", "phase", "tpow", "amp"});
      const double w = e.get("freq", 1.0);
      const double ph = e.get("phase", 0.0);
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), true,
                               [w, ph](double v) { return std::sin(w * v + ph); },
                               [w, ph](double v) { return w * std::cos(w * v + ph); });
    }
    if (n == "tanh") {
      check_keys(e, {"k", "scale", "tpow", "amp"});
      const double s = e.get("scale", 1.0);
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), true,
                               [s](double v) { return std::tanh(s * v); },
                               [s](double v) {
                                 const double c = std::cosh(s * v);
                                 return s / (c * c);
                               });
    }
    if (n == "gauss") {
      check_keys(e, {"k", "width", "tpow", "amp"});
      const double w2 = std::pow(e.get("width", 1.0), 2);
      if (!(w2 > 0.0)) fail(ErrorKind::config, "gauss width must be positive");
      return single_coordinate(e.to_string(), coordinate(e, "k", 1), true,
                               [w2](double v) { return std::exp(-0.5 * v * v / w2); },
                               [w2](double v) { return -v / w2 * std::exp(-0.5 * v * v / w2); });
    }
    if (n == "wave") {
      check_keys(e, {"a1", "a2", "tpow", "amp"});
      const double a1 = e.get("a1", 1.0);
      const double a2 = e.get("a2", 1.0);
      CylinderFunction::Parts p;
      p.base_dim = 2;
      p.value = [a1, a2](double, ConstVectorRef x) { return std::sin(a1 * x[0] + a2 * x[1]); };
      p.gradient = [a1, a2](double, ConstVectorRef x, VectorRef out) {
        const double c = std::cos(a1 * x[0] + a2 * x[1]);
        out[0] = a1 * c;
        out[1] = a2 * c;
      };
      p.name = e.to_string();
      return CylinderFunction(std::move(p));
    }
    if (n == "cossin") {
      check_keys(e, {"k1", "k2", "tpow", "amp"});
      const std::size_t k1 = coordinate(e, "k1", 1);
      const std::size_t k2 = coordinate(e, "k2", 2);
      if (k1 == k2) fail(ErrorKind::config, "cossin needs distinct coordinates");
      const auto i = ix(k1 - 1), j = ix(k2 - 1);
      CylinderFunction::Parts p;
      p.base_dim = std::max(k1, k2);
      p.value = [i, j](double, ConstVectorRef x) { return std::cos(x[i]) * std::sin(x[j]); };
      p.gradient = [i, j](double, ConstVectorRef x, VectorRef out) {
        out.setZero();
        out[i] = -std::sin(x[i]) * std::sin(x[j]);
        out[j] = std::cos(x[i]) * std::cos(x[j]);
      };
      p.name = e.to_string();
      return CylinderFunction(std::move(p));
    }
    fail(ErrorKind::config, "unknown function catalog entry '" + n + "'");
  }();
  CylinderFunction::Parts parts = u.parts();
  parts.horizon = horizon;
  u = CylinderFunction(std::move(parts));
  if (e.params.contains("amp")) u = e.get("amp", 1.0) * u;
  if (e.params.contains("tpow")) u = vanish_at_horizon(u, horizon, e.get("tpow", 1.0));
  return u;
}

CylinderFunction make_function(std::string_view text, double horizon) {
  return make_function(parse_catalog_entry(text), horizon);
}

CylinderVectorField make_field(const CatalogEntry& e, std::size_t ambient_dim, double horizon) {
  const std::string& n = e.name;
  CylinderVectorField::Parts p;
  p.name = e.to_string();
  if (n == "zero") {
    check_keys(e, {"n", "tmod"});
    p.base_dim = coordinate(e, "n", 1);
    p.value = [](double, ConstVectorRef, VectorRef out) { out.setZero(); };
    p.jacobian = [](double, ConstVectorRef, MatrixRef out) { out.setZero(); };
  } else if (n == "const") {
    check_keys(e, {"k", "c", "tmod"});
    p.base_dim = coordinate(e, "k", 1);
    const double c = e.get("c", 1.0);
    const auto k = ix(p.base_dim - 1);
    p.value = [c, k](double, ConstVectorRef, VectorRef out) {
      out.setZero();
      out[k] = c;
    };
    p.jacobian = [](double, ConstVectorRef, MatrixRef out) { out.setZero(); };
  } else if (n == "linear") {
    check_keys(e, {"k", "a", "tmod"});
    p.base_dim = coordinate(e, "k", 1);
    const double a = e.get("a", 1.0);
    const auto k = ix(p.base_dim - 1);
    p.value = [a, k](double, ConstVectorRef x, VectorRef out) {
      out.setZero();
      out[k] = a * x[k];
    };
    p.jacobian = [a, k](double, ConstVectorRef, MatrixRef out) {
      out.setZero();
      out(k, k) = a;
    };
    p.bounded = false;
  } else if (n == "decay") {
    check_keys(e, {"n", "a", "tmod"});
    p.base_dim = coordinate(e, "n", static_cast<double>(ambient_dim));
    const double a = e.get("a", 1.0);
    const auto d = ix(p.base_dim);
    p.value = [a, d](double, ConstVectorRef x, VectorRef out) { out = -a * x.head(d); };
    p.jacobian = [a](double, ConstVectorRef, MatrixRef out) {
      out.setZero();
      out.diagonal().setConstant(-a);
    };
    p.bounded = false;
  } else if (n == "shear") {
    check_keys(e, {"i", "j", "a", "tmod"});
    const std::size_t i = coordinate(e, "i", 1);
    const std::size_t j = coordinate(e, "j", 2);
    const double a = e.get("a", 1.0);
    p.base_dim = std::max(i, j);
    const auto ii = ix(i - 1), jj = ix(j - 1);
    p.value = [a, ii, jj](double, ConstVectorRef x, VectorRef out) {
      out.setZero();
      out[ii] = a * x[jj];
    };
    p.jacobian = [a, ii, jj](double, ConstVectorRef, MatrixRef out) {
      out.setZero();
      out(ii, jj) = a;
    };
    p.bounded = false;
  } else if (n == "rotanh") {
    check_keys(e, {"a", "tmod"});
    const double a = e.get("a", 1.0);
    p.base_dim = 2;
    p.value = [a](double, ConstVectorRef x, VectorRef out) {
      out[0] = a * std::tanh(x[1]);
      out[1] = -a * std::tanh(x[0]);
    };
    p.jacobian = [a](double, ConstVectorRef x, MatrixRef out) {
      const double c0 = std::cosh(x[0]), c1 = std::cosh(x[1]);
      out(0, 0) = 0.0;
      out(0, 1) = a / (c1 * c1);
      out(1, 0) = -a / (c0 * c0);
      out(1, 1) = 0.0;
    };
  } else if (n == "sinfield") {
    check_keys(e, {"n", "a", "tmod"});
    p.base_dim = coordinate(e, "n", 2);
    const double a = e.get("a", 1.0);
    const auto d = ix(p.base_dim);
    p.value = [a, d](double, ConstVectorRef x, VectorRef out) {
      for (Eigen::Index i = 0; i < d; ++i) out[i] = a * std::sin(x[(i + 1) % d] + static_cast<double>(i));
    };
    p.jacobian = [a, d](double, ConstVectorRef x, MatrixRef out) {
      out.setZero();
      for (Eigen::Index i = 0; i < d; ++i) {
        const Eigen::Index j = (i + 1) % d;
        out(i, j) += a * std::cos(x[j] + static_cast<double>(i));
      }
    };
  } else if (n == "tanhmix") {
    check_keys(e, {"a", "tmod"});
    const double a = e.get("a", 1.0);
    p.base_dim = 2;
    p.value = [a](double, ConstVectorRef x, VectorRef out) {
      out[0] = a * std::tanh(x[0] + x[1]);
      out[1] = a * std::tanh(x[0] - x[1]);
    };
    p.jacobian = [a](double, ConstVectorRef x, MatrixRef out) {
      const double cp = std::cosh(x[0] + x[1]), cm = std::cosh(x[0] - x[1]);
      const double sp = a / (cp * cp), sm = a / (cm * cm);
      out(0, 0) = sp;
      out(0, 1) = sp;
      out(1, 0) = sm;
      out(1, 1) = -sm;
    };
  } else if (n == "bump") {
    check_keys(e, {"k", "n", "radius", "a", "tmod"});
    const std::size_t k = coordinate(e, "k", 1);
    const std::size_t base = std::max(k, coordinate(e, "n", 1));
    const double r2 = std::pow(e.get("radius", 2.0), 2);
    const double a = e.get("a", 1.0);
    if (!(r2 > 0.0)) fail(ErrorKind::config, "bump radius must be positive");
    p.base_dim = base;
    const auto kk = ix(k - 1), d = ix(base);
    p.value = [a, kk, d, r2](double, ConstVectorRef x, VectorRef out) {
      out.setZero();
      out[kk] = a * bump_profile(x.head(d).squaredNorm(), r2);
    };
    p.jacobian = [a, kk, d, r2](double, ConstVectorRef x, MatrixRef out) {
      out.setZero();
      out.row(kk) = (a * bump_slope(x.head(d).squaredNorm(), r2)) * x.head(d).transpose();
    };
    p.compact_support = true;
  } else if (n == "swirl") {
    check_keys(e, {"radius", "a", "tmod"});
    const double r2 = std::pow(e.get("radius", 2.0), 2);
    const double a = e.get("a", 1.0);
    if (!(r2 > 0.0)) fail(ErrorKind::config, "swirl radius must be positive");
    p.base_dim = 2;
    p.value = [a, r2](double, ConstVectorRef x, VectorRef out) {
      const double phi = a * bump_profile(x.head(2).squaredNorm(), r2);
      out[0] = -phi * x[1];
      out[1] = phi * x[0];
    };
    p.jacobian = [a, r2](double, ConstVectorRef x, MatrixRef out) {
      const double q = x.head(2).squaredNorm();
      const double phi = a * bump_profile(q, r2);
      const double slope = a * bump_slope(q, r2);  // d phi / d x_j = slope * x_j
      out(0, 0) = -slope * x[0] * x[1];
      out(0, 1) = -slope * x[1] * x[1] - phi;
      out(1, 0) = slope * x[0] * x[0] + phi;
      out(1, 1) = slope * x[0] * x[1];
    };
    p.compact_support = true;
  } else {
    fail(ErrorKind::config, "unknown field catalog entry '" + n + "'");
  }
  CylinderVectorField field(std::move(p));
  if (e.params.contains("tmod")) field = time_modulated(field, e.get("tmod", 0.0), horizon);
  return field;
}

CylinderVectorField make_field(std::string_view text, std::size_t ambient_dim, double horizon) {
  return make_field(parse_catalog_entry(text), ambient_dim, horizon);
}

}  // namespace gausslab
