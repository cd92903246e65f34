#pragma once

// Run configuration read from a TOML file, then overridden by command-line
// flags. Every value is kept alongside its echo for the CSV provenance block.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <toml.hpp>

#include "mieforce/cli/dispersion.hpp"
#include "mieforce/cli/units.hpp"
#include "mieforce/force.hpp"
#include "mieforce/mie.hpp"

namespace mieforce::cli {

enum class Spacing { Linear, Log };

struct RadiusSweep {
  double min = 0.0;  // m
  double max = 0.0;  // m
  int count = 0;
  Spacing spacing = Spacing::Linear;
};

enum class AngularKind { Isotropic, GaussianCap, TopHatCap, Paraxial };
enum class SpectralKind { Delta, Gaussian };

struct RunConfig {
  // [target]
  std::optional<double> radius;  // m, single point
  std::optional<RadiusSweep> sweep;

  // [material]
  std::optional<cdouble> epsilon;
  std::string table_path;
  MaterialSpec material;

  // [source]
  double omega0 = 0.0;  // rad/s

  // [squeezing]
  double r0 = 0.0;
  Vec3 axis = Vec3::UnitZ();
  AngularKind angular = AngularKind::Isotropic;
  double angular_parameter = 0.0;  // sigma or theta_max (rad), solid angle (sr)
  SpectralKind spectral = SpectralKind::Delta;
  std::string bandwidth_text;      // as written, read under bandwidth_unit
  std::optional<BandwidthUnit> bandwidth_unit;

  // [thermal]
  double temperature = 0.0;  // K

  // [numerics]
  TruncationPolicy truncation;
  int n_theta = 64;
  int n_phi = 128;
  double tolerance = 1e-8;
  int max_doublings = 3;
  int spectral_nodes = 48;
  FunctionalMode mode = FunctionalMode::SphereReduced;
  double dyadic_max_size_parameter = 5.0;
  int threads = 0;  // 0: environment default

  // [output]
  std::string out_path;
  std::vector<std::string> columns;

  // key = value lines echoed into CSV comments, in file order.
  std::vector<std::pair<std::string, std::string>> echo;

  std::vector<double> radii() const {
    if (radius) return {*radius};
    if (!sweep) throw ConfigError("[target] needs 'radius' or 'radius_min'/'radius_max'/'count'");
    const RadiusSweep& s = *sweep;
    std::vector<double> r(static_cast<std::size_t>(s.count));
    for (int i = 0; i < s.count; ++i) {
      const double t = s.count == 1 ? 0.0 : static_cast<double>(i) / (s.count - 1);
      r[static_cast<std::size_t>(i)] = s.spacing == Spacing::Linear
                                           ? s.min + t * (s.max - s.min)
                                           : std::exp(std::log(s.min) + t * (std::log(s.max) - std::log(s.min)));
    }
    if (s.count > 1) r.back() = s.max;
    return r;
  }

  double bandwidth() const {
    if (!bandwidth_unit) throw ConfigError("[squeezing] bandwidth_unit is required with a spectral envelope");
    const double b = parse_bandwidth(bandwidth_text, *bandwidth_unit);
    if (!(b > 0.0)) throw ConfigError("[squeezing] bandwidth must be positive");
    return b;
  }

  bool has_squeezing() const { return !bandwidth_text.empty(); }

  SqueezingProfile profile() const {
    SqueezingProfile p;
    p.r0 = r0;
    p.axis = axis;
    switch (angular) {
      case AngularKind::Isotropic: p.angular = IsotropicEnvelope{}; break;
      case AngularKind::GaussianCap: p.angular = GaussianCap{angular_parameter}; break;
      case AngularKind::TopHatCap: p.angular = TopHatCap{angular_parameter}; break;
      case AngularKind::Paraxial: p.angular = ParaxialBeam{angular_parameter}; break;
    }
    if (spectral == SpectralKind::Delta) p.spectral = DeltaBand{omega0, bandwidth()};
    else p.spectral = GaussianBand{omega0, bandwidth()};
    return p;
  }

  ForceGrids grids(int worker_threads) const {
    ForceGrids g;
    g.n_theta = n_theta;
    g.n_phi = n_phi;
    g.angular_tolerance = tolerance;
    g.max_doublings = max_doublings;
    g.spectral_nodes = spectral_nodes;
    g.truncation = truncation;
    g.functional.mode = mode;
    g.functional.threads = worker_threads;
    g.functional.dyadic_max_size_parameter = dyadic_max_size_parameter;
    return g;
  }
};

/// Command-line values that replace config-file entries.
struct Overrides {
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> bandwidth_unit;
  std::optional<std::string> truncation;
};

namespace detail {

inline std::string location(const toml::node& n, const std::string& key) {
  const auto& src = n.source();
  std::string where = key;
  if (src.begin.line > 0) {
    where = (src.path ? std::string(*src.path) : std::string("config")) + ":" + std::to_string(src.begin.line) + ": " + key;
  }
  return where;
}

/// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string echo_value(const toml::node& n) {
  if (auto s = n.value_exact<std::string>()) return '"' + *s + '"';
  if (auto i = n.value_exact<int64_t>()) return std::to_string(*i);
  if (auto f = n.value_exact<double>()) return shortest(*f);
  if (auto b = n.value_exact<bool>()) return *b ? "true" : "false";
  if (const toml::array* a = n.as_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < a->size(); ++i) s += (i ? ", " : "") + echo_value(*a->get(i));
    return s + "]";
  }
  return "<table>";
}

class Reader {
 public:
  Reader(const toml::table& root, RunConfig& cfg) : root_(root), cfg_(cfg) {}

  const toml::table* section(const std::string& name) {
    const toml::node* n = root_.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(location(*n, name) + ": expected a [" + name + "] table");
    return n->as_table();
  }

  const toml::node* get(const toml::table* t, const std::string& sec, const std::string& key) {
    if (!t) return nullptr;
    const toml::node* n = t->get(key);
    if (n) {
      cfg_.echo.emplace_back(sec + "." + key, echo_value(*n));
      used_.push_back(sec + "." + key);
    }
    return n;
  }

  double number(const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>()) return *v;
    throw ConfigError(location(n, key) + ": expected a number");
  }

  int integer(const toml::node& n, const std::string& key) {
    if (auto v = n.value_exact<int64_t>()) return static_cast<int>(*v);
    throw ConfigError(location(n, key) + ": expected an integer");
  }

  std::string string(const toml::node& n, const std::string& key) {
    if (auto v = n.value_exact<std::string>()) return *v;
    throw ConfigError(location(n, key) + ": expected a string");
  }

  /// Number (SI) or string with unit suffix.
  double quantity(const toml::node& n, const std::string& key, Dimension dim) {
    try {
      if (n.is_string()) return parse_quantity(*n.value<std::string>(), dim);
      return number(n, key);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(location(n, key), 0) == 0) throw;
      throw ConfigError(location(n, key) + ": " + msg);
    }
  }

  std::string text(const toml::node& n, const std::string& key) {
    if (n.is_string()) return *n.value<std::string>();
    if (auto v = n.value<double>()) return shortest(*v);
    throw ConfigError(location(n, key) + ": expected a number or string");
  }

  void reject_unknown(const toml::table* t, const std::string& sec) {
    if (!t) return;
    for (const auto& [k, v] : *t) {
      const std::string full = sec + "." + std::string(k.str());
      if (std::find(used_.begin(), used_.end(), full) == used_.end())
        throw ConfigError(location(v, full) + ": unknown key");
    }
  }

 private:
  const toml::table& root_;
  RunConfig& cfg_;
  std::vector<std::string> used_;
};

inline void fail(const toml::node& n, const std::string& key, const std::string& what) {
  throw ConfigError(location(n, key) + ": " + what);
}

}  // namespace detail

/// Parses TOML text into a RunConfig. `source` names the file in messages;
/// relative table paths resolve against `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config",
                              const std::filesystem::path& base_dir = {}) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ConfigError(source + ":" + std::to_string(b.line) + ":" + std::to_string(b.column) + ": " +
                      std::string(e.description()));
  }

  RunConfig cfg;
  detail::Reader rd(root, cfg);
  for (const auto& [k, v] : root) {
    const std::string name(k.str());
    static const std::vector<std::string> known = {"target", "material", "source", "squeezing",
                                                   "thermal", "numerics", "output"};
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError(detail::location(v, name) + ": unknown section");
  }

  // [target]
  const toml::table* target = rd.section("target");
  if (auto n = rd.get(target, "target", "radius")) {
    cfg.radius = rd.quantity(*n, "target.radius", Dimension::Length);
    if (!(*cfg.radius > 0.0)) detail::fail(*n, "target.radius", "must be positive");
  }
  {
    auto lo = rd.get(target, "target", "radius_min");
    auto hi = rd.get(target, "target", "radius_max");
    auto count = rd.get(target, "target", "count");
    auto spacing = rd.get(target, "target", "spacing");
    if (lo || hi || count || spacing) {
      if (cfg.radius) throw ConfigError(source + ": [target] give either 'radius' or a sweep, not both");
      if (!lo || !hi || !count) throw ConfigError(source + ": [target] sweep needs radius_min, radius_max and count");
      RadiusSweep s;
      s.min = rd.quantity(*lo, "target.radius_min", Dimension::Length);
      s.max = rd.quantity(*hi, "target.radius_max", Dimension::Length);
      s.count = rd.integer(*count, "target.count");
      if (!(s.min > 0.0)) detail::fail(*lo, "target.radius_min", "must be positive");
      if (!(s.max >= s.min)) detail::fail(*hi, "target.radius_max", "must be >= radius_min");
      if (s.count < 1) detail::fail(*count, "target.count", "must be >= 1");
      if (spacing) {
        const std::string sp = rd.string(*spacing, "target.spacing");
        if (sp == "linear") s.spacing = Spacing::Linear;
        else if (sp == "log") s.spacing = Spacing::Log;
        else detail::fail(*spacing, "target.spacing", "must be 'linear' or 'log'");
      }
      cfg.sweep = s;
    }
  }
  if (!cfg.radius && !cfg.sweep) throw ConfigError(source + ": [target] needs 'radius' or a radius sweep");
  rd.reject_unknown(target, "target");

  // [material]
  const toml::table* material = rd.section("material");
  if (!material) throw ConfigError(source + ": missing [material] section");
  {
    auto eps = rd.get(material, "material", "epsilon");
    auto table = rd.get(material, "material", "table");
    if (eps && table) throw ConfigError(source + ": [material] give either 'epsilon' or 'table'");
    if (eps) {
      cdouble e;
      if (const toml::array* a = eps->as_array()) {
        if (a->size() != 2) detail::fail(*eps, "material.epsilon", "expected [re, im]");
        e = {rd.number(*a->get(0), "material.epsilon"), rd.number(*a->get(1), "material.epsilon")};
      } else {
        e = {rd.number(*eps, "material.epsilon"), 0.0};
      }
      if (e.imag() < 0.0) detail::fail(*eps, "material.epsilon", "Im(epsilon) < 0 is not passive");
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) detail::fail(*eps, "material.epsilon", "not finite");
      cfg.epsilon = e;
      cfg.material = MaterialSpec::constant(e);
    } else if (table) {
      std::filesystem::path p = rd.string(*table, "material.table");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.table_path = p.string();
      cfg.material = load_dispersion_table(cfg.table_path);
    } else {
      throw ConfigError(source + ": [material] needs 'epsilon' or 'table'");
    }
  }
  rd.reject_unknown(material, "material");

  // [source]
  const toml::table* src = rd.section("source");
  if (!src) throw ConfigError(source + ": missing [source] section");
  {
    auto wl = rd.get(src, "source", "wavelength");
    auto fr = rd.get(src, "source", "frequency");
    if ((wl != nullptr) == (fr != nullptr)) throw ConfigError(source + ": [source] give exactly one of wavelength, frequency");
    if (wl) {
      const double lambda = rd.quantity(*wl, "source.wavelength", Dimension::Length);
      if (!(lambda > 0.0)) detail::fail(*wl, "source.wavelength", "must be positive");
      cfg.omega0 = 2.0 * constants::pi * constants::speed_of_light / lambda;
    } else {
      cfg.omega0 = rd.quantity(*fr, "source.frequency", Dimension::Frequency);
      if (!(cfg.omega0 > 0.0)) detail::fail(*fr, "source.frequency", "must be positive");
    }
  }
  rd.reject_unknown(src, "source");

  // [squeezing]
  if (const toml::table* sq = rd.section("squeezing")) {
    auto r0 = rd.get(sq, "squeezing", "r0");
    auto level = rd.get(sq, "squeezing", "level");
    if (r0 && level) throw ConfigError(source + ": [squeezing] give either r0 or level");
    if (r0) cfg.r0 = rd.number(*r0, "squeezing.r0");
    if (level) cfg.r0 = parse_squeezing(rd.text(*level, "squeezing.level"));
    if (!(cfg.r0 >= 0.0)) throw ConfigError(source + ": [squeezing] r0 must be >= 0");
    if (auto ax = rd.get(sq, "squeezing", "axis")) {
      const toml::array* a = ax->as_array();
      if (!a || a->size() != 3) detail::fail(*ax, "squeezing.axis", "expected [x, y, z]");
      cfg.axis = {rd.number(*a->get(0), "squeezing.axis"), rd.number(*a->get(1), "squeezing.axis"),
                  rd.number(*a->get(2), "squeezing.axis")};
      if (!(cfg.axis.norm() > 0.0)) detail::fail(*ax, "squeezing.axis", "must be non-zero");
      cfg.axis.normalize();
    }
    if (auto an = rd.get(sq, "squeezing", "angular")) {
      const std::string kind = rd.string(*an, "squeezing.angular");
      if (kind == "isotropic") {
        cfg.angular = AngularKind::Isotropic;
      } else if (kind == "gaussian_cap" || kind == "top_hat_cap" || kind == "paraxial") {
        const std::string key = kind == "gaussian_cap" ? "sigma_theta" : kind == "top_hat_cap" ? "theta_max" : "solid_angle";
        auto p = rd.get(sq, "squeezing", key);
        if (!p) detail::fail(*an, "squeezing.angular", kind + " needs squeezing." + key);
        if (kind == "paraxial") {
          cfg.angular = AngularKind::Paraxial;
          cfg.angular_parameter = rd.quantity(*p, "squeezing." + key, Dimension::SolidAngle);
        } else {
          cfg.angular = kind == "gaussian_cap" ? AngularKind::GaussianCap : AngularKind::TopHatCap;
          cfg.angular_parameter = rd.quantity(*p, "squeezing." + key, Dimension::Angle);
        }
        if (!(cfg.angular_parameter > 0.0)) detail::fail(*p, "squeezing." + key, "must be positive");
      } else {
        detail::fail(*an, "squeezing.angular", "unknown envelope '" + kind + "'");
      }
    }
    auto sp = rd.get(sq, "squeezing", "spectral");
    auto bw = rd.get(sq, "squeezing", "bandwidth");
    auto unit = rd.get(sq, "squeezing", "bandwidth_unit");
    if (sp) {
      const std::string kind = rd.string(*sp, "squeezing.spectral");
      if (kind == "delta") cfg.spectral = SpectralKind::Delta;
      else if (kind == "gaussian") cfg.spectral = SpectralKind::Gaussian;
      else detail::fail(*sp, "squeezing.spectral", "must be 'delta' or 'gaussian'");
      if (!bw) detail::fail(*sp, "squeezing.spectral", "needs squeezing.bandwidth");
    }
    if (bw) {
      cfg.bandwidth_text = rd.text(*bw, "squeezing.bandwidth");
      if (unit) {
        try {
          cfg.bandwidth_unit = parse_bandwidth_unit(rd.string(*unit, "squeezing.bandwidth_unit"));
        } catch (const ConfigError& e) {
          detail::fail(*unit, "squeezing.bandwidth_unit", e.what());
        }
      }
    }
    rd.reject_unknown(sq, "squeezing");
  }

  // [thermal]
  if (const toml::table* th = rd.section("thermal")) {
    if (auto t = rd.get(th, "thermal", "temperature")) {
      cfg.temperature = rd.quantity(*t, "thermal.temperature", Dimension::Temperature);
      if (!(cfg.temperature >= 0.0)) detail::fail(*t, "thermal.temperature", "must be >= 0 K");
    }
    rd.reject_unknown(th, "thermal");
  }

  // [numerics]
  if (const toml::table* nu = rd.section("numerics")) {
    if (auto t = rd.get(nu, "numerics", "truncation")) {
      try {
        cfg.truncation = TruncationPolicy::parse(rd.string(*t, "numerics.truncation"));
      } catch (const ConfigError& e) {
        detail::fail(*t, "numerics.truncation", e.what());
      }
    }
    if (auto t = rd.get(nu, "numerics", "n_theta")) cfg.n_theta = rd.integer(*t, "numerics.n_theta");
    if (auto t = rd.get(nu, "numerics", "n_phi")) cfg.n_phi = rd.integer(*t, "numerics.n_phi");
    if (auto t = rd.get(nu, "numerics", "tolerance")) cfg.tolerance = rd.number(*t, "numerics.tolerance");
    if (auto t = rd.get(nu, "numerics", "max_doublings")) cfg.max_doublings = rd.integer(*t, "numerics.max_doublings");
    if (auto t = rd.get(nu, "numerics", "spectral_nodes")) cfg.spectral_nodes = rd.integer(*t, "numerics.spectral_nodes");
    if (auto t = rd.get(nu, "numerics", "mode")) {
      try {
        cfg.mode = parse_functional_mode(rd.string(*t, "numerics.mode"));
      } catch (const ConfigError& e) {
        detail::fail(*t, "numerics.mode", e.what());
      }
    }
    if (auto t = rd.get(nu, "numerics", "dyadic_max_size_parameter"))
      cfg.dyadic_max_size_parameter = rd.number(*t, "numerics.dyadic_max_size_parameter");
    if (auto t = rd.get(nu, "numerics", "threads")) cfg.threads = rd.integer(*t, "numerics.threads");
    if (cfg.n_theta < 2 || cfg.n_phi < 4) throw ConfigError(source + ": [numerics] needs n_theta >= 2, n_phi >= 4");
    if (!(cfg.tolerance > 0.0)) throw ConfigError(source + ": [numerics] tolerance must be positive");
    if (cfg.spectral_nodes < 1) throw ConfigError(source + ": [numerics] spectral_nodes must be >= 1");
    if (cfg.max_doublings < 0) throw ConfigError(source + ": [numerics] max_doublings must be >= 0");
    if (cfg.threads < 0) throw ConfigError(source + ": [numerics] threads must be >= 0");
    rd.reject_unknown(nu, "numerics");
  }

  // [output]
  if (const toml::table* out = rd.section("output")) {
    if (auto p = rd.get(out, "output", "path")) cfg.out_path = rd.string(*p, "output.path");
    if (auto c = rd.get(out, "output", "columns")) {
      const toml::array* a = c->as_array();
      if (!a) detail::fail(*c, "output.columns", "expected an array of column names");
      for (const auto& e : *a) cfg.columns.push_back(rd.string(e, "output.columns"));
    }
    rd.reject_unknown(out, "output");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, std::filesystem::path(path).parent_path());
}

/// Flags win over the file. Overrides that change results are echoed; --out
/// and --threads are not, so runs differing only in those stay byte-identical.
inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.out_path = *o.out;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.threads = *o.threads;
  }
  if (o.bandwidth_unit) {
    cfg.bandwidth_unit = parse_bandwidth_unit(*o.bandwidth_unit);
    cfg.echo.emplace_back("flag.bandwidth_unit", '"' + *o.bandwidth_unit + '"');
  }
  if (o.truncation) {
    cfg.truncation = TruncationPolicy::parse(*o.truncation);
    cfg.echo.emplace_back("flag.truncation", '"' + *o.truncation + '"');
  }
  if (cfg.has_squeezing() && !cfg.bandwidth_unit)
    throw ConfigError("[squeezing] bandwidth_unit ('rad_s' or 'hz') is required when a spectral envelope is given");
  if (cfg.has_squeezing()) cfg.bandwidth();
}

inline int resolve_threads(const RunConfig& cfg) { return cfg.threads > 0 ? cfg.threads : default_thread_count(); }

}  // namespace mieforce::cli
