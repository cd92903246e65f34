#pragma once

// Dispersion tables: one sample per line, "abscissa Re(eps) Im(eps)" separated
// by commas, tabs or spaces. The abscissa carries a wavelength or frequency
// suffix ("1550nm", "193.4 THz", "1.2e15 rad_s"). '#' starts a comment.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mieforce/cli/units.hpp"
#include "mieforce/material.hpp"

namespace mieforce::cli {

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string f; in >> f;) out.push_back(f);
  return out;
}

/// Abscissa to rad/s. A number and its unit may be split across two fields.
inline double abscissa_to_omega(const std::string& text) {
  const SplitQuantity q = split_quantity(text);
  if (q.suffix.empty()) throw ConfigError("abscissa '" + text + "' needs a unit suffix");
  for (const auto& u : mieforce::cli::detail::unit_table()) {
    if (u.name != q.suffix) continue;
    if (u.dim == Dimension::Length) {
      const double lambda = u.apply(q.value);
      if (!(lambda > 0.0)) throw ConfigError("non-positive wavelength '" + text + "'");
      return 2.0 * constants::pi * constants::speed_of_light / lambda;
    }
    if (u.dim == Dimension::Frequency) return parse_quantity(text, Dimension::Frequency);
    break;
  }
  throw ConfigError("abscissa '" + text + "' must be a wavelength or a frequency");
}

}  // namespace detail

/// Parses table text; `source` names it in error messages. Rows are sorted by
/// angular frequency.
inline MaterialSpec parse_dispersion_table(std::istream& in, const std::string& source) {
  std::vector<PermittivitySample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    // "1550 nm 12.1 0.1": merge a detached unit into the abscissa.
    if (fields.size() == 4) {
      fields[0] += fields[1];
      fields.erase(fields.begin() + 1);
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw ConfigError(where + ": expected 3 columns (abscissa, Re eps, Im eps)");
    try {
      const double omega = detail::abscissa_to_omega(fields[0]);
      std::size_t u1 = 0, u2 = 0;
      const double re = std::stod(fields[1], &u1);
      const double im = std::stod(fields[2], &u2);
      if (u1 != fields[1].size() || u2 != fields[2].size()) throw ConfigError("trailing characters in permittivity");
      samples.push_back({omega, {re, im}});
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::exception&) {
      throw ConfigError(where + ": cannot parse permittivity");
    }
  }
  if (samples.empty()) throw ConfigError(source + ": dispersion table has no rows");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.omega < b.omega; });
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].omega == samples[i - 1].omega) throw ConfigError(source + ": duplicate abscissa in dispersion table");
  }
  try {
    return MaterialSpec::tabulated(std::move(samples));
  } catch (const DomainError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline MaterialSpec load_dispersion_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dispersion table '" + path + "'");
  return parse_dispersion_table(in, path);
}

}  // namespace mieforce::cli
