#pragma once

// Quantities with explicit unit suffixes, converted to SI at the boundary.

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/force.hpp"

namespace mieforce::cli {

enum class Dimension { Length, Frequency, Bandwidth, Angle, SolidAngle, Temperature };

inline std::string dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Frequency: return "frequency";
    case Dimension::Bandwidth: return "bandwidth";
    case Dimension::Angle: return "angle";
    case Dimension::SolidAngle: return "solid angle";
    case Dimension::Temperature: return "temperature";
  }
  return "quantity";
}

/// How a bare bandwidth number is read.
enum class BandwidthUnit { RadPerSecond, Hertz };

inline BandwidthUnit parse_bandwidth_unit(const std::string& s) {
  if (s == "rad_s" || s == "rad/s") return BandwidthUnit::RadPerSecond;
  if (s == "hz" || s == "Hz") return BandwidthUnit::Hertz;
  throw ConfigError("bandwidth unit must be 'rad_s' or 'hz', got '" + s + "'");
}

inline std::string to_string(BandwidthUnit u) { return u == BandwidthUnit::Hertz ? "hz" : "rad_s"; }

struct SplitQuantity {
  double value;
  std::string suffix;
};

/// "1550 nm", "1550nm", "2.5e12" -> number and (trimmed) suffix.
inline SplitQuantity split_quantity(std::string_view text) {
  std::string s(text);
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  while (!s.empty() && !not_space(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && !not_space(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw ConfigError("empty quantity");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot read a number from '" + s + "'");
  }
  std::string suffix = s.substr(used);
  std::size_t i = 0;
  while (i < suffix.size() && std::isspace(static_cast<unsigned char>(suffix[i]))) ++i;
  return {v, suffix.substr(i)};
}

namespace detail {

struct UnitEntry {
  std::string_view name;
  Dimension dim;
  double factor;     // SI value of one unit is factor / divisor
  bool per_cycle;    // ordinary frequency: multiply by 2 pi for rad/s
  double divisor = 1.0;

  // Dividing by an exact power of ten keeps "10 um" at exactly 1e-5.
  double apply(double v) const { return v * factor / divisor * (per_cycle ? 2.0 * constants::pi : 1.0); }
};

inline const std::vector<UnitEntry>& unit_table() {
  static const std::vector<UnitEntry> table = {
      {"m", Dimension::Length, 1.0, false},
      {"cm", Dimension::Length, 1.0, false, 1e2},
      {"mm", Dimension::Length, 1.0, false, 1e3},
      {"um", Dimension::Length, 1.0, false, 1e6},
      {"\xC2\xB5m", Dimension::Length, 1.0, false, 1e6},  // micro sign
      {"\xCE\xBCm", Dimension::Length, 1.0, false, 1e6},  // greek mu
      {"nm", Dimension::Length, 1.0, false, 1e9},
      {"Hz", Dimension::Frequency, 1.0, true},
      {"kHz", Dimension::Frequency, 1e3, true},
      {"MHz", Dimension::Frequency, 1e6, true},
      {"GHz", Dimension::Frequency, 1e9, true},
      {"THz", Dimension::Frequency, 1e12, true},
      {"PHz", Dimension::Frequency, 1e15, true},
      {"rad_s", Dimension::Frequency, 1.0, false},
      {"rad/s", Dimension::Frequency, 1.0, false},
      {"rad", Dimension::Angle, 1.0, false},
      {"mrad", Dimension::Angle, 1.0, false, 1e3},
      {"deg", Dimension::Angle, constants::pi, false, 180.0},
      {"sr", Dimension::SolidAngle, 1.0, false},
      {"K", Dimension::Temperature, 1.0, false},
  };
  return table;
}

}  // namespace detail

/// SI value of a quantity string. Lengths come back in metres, frequencies in
/// rad/s (Hz suffixes are multiplied by 2 pi), angles in rad. A bare number is
/// taken as SI (rad/s for frequencies).
inline double parse_quantity(std::string_view text, Dimension dim) {
  const SplitQuantity q = split_quantity(text);
  if (!std::isfinite(q.value)) throw ConfigError("non-finite quantity '" + std::string(text) + "'");
  if (dim == Dimension::Bandwidth) throw ConfigError("bandwidths need parse_bandwidth");
  if (q.suffix.empty()) return q.value;
  for (const auto& u : detail::unit_table()) {
    if (u.name == q.suffix) {
      if (u.dim != dim)
        throw ConfigError("unit '" + q.suffix + "' is not a " + dimension_name(dim) + " unit");
      return u.apply(q.value);
    }
  }
  throw ConfigError("unknown unit '" + q.suffix + "' in '" + std::string(text) + "'");
}

/// Bandwidth in rad/s. The declared unit decides how the number is read; a
/// suffix may only add a decimal prefix consistent with it ("2.5 THz" with
/// unit hz, "1e12 rad_s" with unit rad_s).
inline double parse_bandwidth(std::string_view text, BandwidthUnit unit) {
  const SplitQuantity q = split_quantity(text);
  if (!std::isfinite(q.value)) throw ConfigError("non-finite bandwidth '" + std::string(text) + "'");
  double scale = 1.0;
  if (!q.suffix.empty()) {
    bool found = false;
    for (const auto& u : detail::unit_table()) {
      if (u.name != q.suffix) continue;
      if (u.dim != Dimension::Frequency) throw ConfigError("unit '" + q.suffix + "' is not a bandwidth unit");
      const BandwidthUnit implied = u.per_cycle ? BandwidthUnit::Hertz : BandwidthUnit::RadPerSecond;
      if (implied != unit)
        throw ConfigError("bandwidth '" + std::string(text) + "' contradicts bandwidth_unit = " + to_string(unit));
      scale = u.factor;
      found = true;
    }
    if (!found) throw ConfigError("unknown bandwidth unit '" + q.suffix + "'");
  }
  const double v = q.value * scale;
  return unit == BandwidthUnit::Hertz ? 2.0 * constants::pi * v : v;
}

/// "6 dB" -> ln(10^{6/20}); a bare number is r0 itself.
inline double parse_squeezing(std::string_view text) {
  const SplitQuantity q = split_quantity(text);
  if (q.suffix.empty()) return q.value;
  if (q.suffix == "dB") return squeezing_from_db(q.value);
  throw ConfigError("squeezing must be a bare r0 or a dB value, got '" + std::string(text) + "'");
}

}  // namespace mieforce::cli
