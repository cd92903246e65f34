#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "mieforce/errors.hpp"

namespace mieforce {

/// Relative permittivity sample at one angular frequency.
struct PermittivitySample {
  double omega;  // rad/s
  std::complex<double> eps;
};

struct PermittivityValue {
  std::complex<double> eps;
  bool extrapolated = false;  // omega fell outside the table; end value used
};

/// Complex relative permittivity eps(omega): a constant, or a table with
/// linear interpolation of Re and Im. Passivity (Im eps >= 0) is enforced on
/// construction.
class MaterialSpec {
 public:
  MaterialSpec() = default;

  static MaterialSpec constant(std::complex<double> eps) {
    check_passive(eps, "constant permittivity");
    MaterialSpec m;
    m.table_ = {{0.0, eps}};
    m.constant_ = true;
    return m;
  }

  /// Samples must be strictly increasing in omega. A single sample is a
  /// constant material with a nominal frequency attached.
  static MaterialSpec tabulated(std::vector<PermittivitySample> samples) {
    if (samples.empty()) throw ConfigError("permittivity table is empty");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (!(s.omega > 0.0) || !std::isfinite(s.omega))
        throw ConfigError("permittivity table: non-positive frequency at row " + std::to_string(i));
      check_passive(s.eps, "permittivity table row " + std::to_string(i));
      if (i > 0 && !(s.omega > samples[i - 1].omega))
        throw ConfigError("permittivity table: frequencies not strictly increasing at row " +
                          std::to_string(i));
    }
    MaterialSpec m;
    m.table_ = std::move(samples);
    m.constant_ = false;
    return m;
  }

  bool is_constant() const noexcept { return constant_; }
  const std::vector<PermittivitySample>& samples() const noexcept { return table_; }

  PermittivityValue at(double omega) const {
    if (table_.empty()) throw ConfigError("material has no permittivity");
    if (constant_ || table_.size() == 1) {
      return {table_.front().eps, !constant_ && omega != table_.front().omega};
    }
    if (omega <= table_.front().omega) return {table_.front().eps, omega < table_.front().omega};
    if (omega >= table_.back().omega) return {table_.back().eps, omega > table_.back().omega};
    auto hi = std::upper_bound(table_.begin(), table_.end(), omega,
                               [](double w, const PermittivitySample& s) { return w < s.omega; });
    auto lo = hi - 1;
    const double t = (omega - lo->omega) / (hi->omega - lo->omega);
    return {lo->eps + t * (hi->eps - lo->eps), false};
  }

 private:
  static void check_passive(std::complex<double> eps, const std::string& where) {
    if (!std::isfinite(eps.real()) || !std::isfinite(eps.imag()))
      throw ConfigError(where + ": non-finite permittivity");
    if (eps.imag() < 0.0)
      throw DomainError(where + ": Im eps < 0 violates passivity");
  }

  std::vector<PermittivitySample> table_;
  bool constant_ = true;
};

struct SphereTarget {
  double radius = 0.0;  // m
  MaterialSpec material;
};

}  // namespace mieforce
