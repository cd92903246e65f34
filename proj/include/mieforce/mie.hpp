#pragma once

// Mie coefficients and optical cross-sections of a homogeneous, nonmagnetic
// sphere (time convention exp(-i omega t), outgoing waves h_n^(1)).

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/material.hpp"
#include "mieforce/special_functions.hpp"
#include "mieforce/summation.hpp"

namespace mieforce {

struct TruncationPolicy {
  enum class Kind { Auto, Fixed };
  Kind kind = Kind::Auto;
  int fixed_order = 0;

  static TruncationPolicy automatic() { return {}; }
  static TruncationPolicy fixed(int n) { return {Kind::Fixed, n}; }

  /// "auto" or "fixed:N".
  static TruncationPolicy parse(const std::string& text) {
    if (text == "auto") return automatic();
    const std::string prefix = "fixed:";
    if (text.rfind(prefix, 0) == 0) {
      const std::string digits = text.substr(prefix.size());
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(digits, &used);
      } catch (const std::exception&) {
        throw ConfigError("truncation: cannot parse order in '" + text + "'");
      }
      if (used != digits.size()) throw ConfigError("truncation: trailing characters in '" + text + "'");
      if (n < 1) throw ConfigError("truncation: fixed order must be >= 1, got '" + text + "'");
      return fixed(n);
    }
    throw ConfigError("truncation: expected 'auto' or 'fixed:N', got '" + text + "'");
  }

  std::string to_string() const {
    return kind == Kind::Auto ? std::string("auto") : "fixed:" + std::to_string(fixed_order);
  }
};

/// Wiscombe order ceil(x + 4 x^{1/3} + 2) for the auto policy, N verbatim for
/// the fixed policy.
inline int truncation_order(double x, const TruncationPolicy& policy) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("truncation_order: size parameter must be positive, got " + std::to_string(x));
  if (policy.kind == TruncationPolicy::Kind::Fixed) {
    if (policy.fixed_order < 1)
      throw ConfigError("truncation_order: fixed order must be >= 1, got " +
                        std::to_string(policy.fixed_order));
    return policy.fixed_order;
  }
  const int n = static_cast<int>(std::ceil(x + 4.0 * std::cbrt(x) + 2.0));
  return std::max(n, 1);
}

struct MieSolution {
  double omega = 0.0;           // rad/s
  double k = 0.0;               // vacuum wavenumber, 1/m
  double radius = 0.0;          // m
  double size_parameter = 0.0;  // x = k a
  cdouble permittivity{1.0, 0.0};
  cdouble refractive_index{1.0, 0.0};  // principal sqrt(eps), Im >= 0
  cdouble interior_argument{};         // k^V a = x sqrt(eps)
  int n_trunc = 0;
  // a[n-1], b[n-1] hold a_n, b_n for n = 1..n_trunc.
  std::vector<cdouble> a;
  std::vector<cdouble> b;
  // Orders above this were set to zero because xi_n(x) left the double range
  // (|a_n|, |b_n| are then far below the smallest double).
  int effective_order = 0;
  bool material_extrapolated = false;

  cdouble a_n(int n) const { return a.at(static_cast<std::size_t>(n - 1)); }
  cdouble b_n(int n) const { return b.at(static_cast<std::size_t>(n - 1)); }
};

namespace detail {

inline MieSolution prepare_solution(const SphereTarget& target, double omega, int n_trunc) {
  if (!(target.radius > 0.0) || !std::isfinite(target.radius))
    throw DomainError("sphere radius must be positive, got " + std::to_string(target.radius));
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("angular frequency must be positive, got " + std::to_string(omega));
  if (n_trunc < 1) throw ConfigError("truncation order must be >= 1, got " + std::to_string(n_trunc));

  const PermittivityValue pv = target.material.at(omega);
  if (pv.eps.imag() < 0.0) throw DomainError("Im eps < 0 at omega = " + std::to_string(omega));

  MieSolution s;
  s.omega = omega;
  s.k = omega / constants::speed_of_light;
  s.radius = target.radius;
  s.size_parameter = s.k * target.radius;
  s.permittivity = pv.eps;
  s.refractive_index = std::sqrt(pv.eps);
  s.interior_argument = s.refractive_index * s.size_parameter;
  s.n_trunc = n_trunc;
  s.a.assign(static_cast<std::size_t>(n_trunc), cdouble{});
  s.b.assign(static_cast<std::size_t>(n_trunc), cdouble{});
  s.material_extrapolated = pv.extrapolated;
  return s;
}

inline void check_coefficient(cdouble v, int n, cdouble z, const char* which) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw RangeError(std::string("mie_coefficients: non-finite ") + which + " at n = " +
                     std::to_string(n) + ", interior argument z = " + describe(z));
}

}  // namespace detail

/// a_n, b_n through the logarithmic derivative D_n(m x) of the interior
/// solution, which never forms psi_n(k^V a) and so stays finite for lossy
/// interiors:
///
///   a_n = [(D_n/m + n/x) psi_n - psi_{n-1}] / [(D_n/m + n/x) xi_n - xi_{n-1}]
///   b_n = [(m D_n + n/x) psi_n - psi_{n-1}] / [(m D_n + n/x) xi_n - xi_{n-1}]
inline MieSolution mie_coefficients(const SphereTarget& target, double omega, int n_trunc) {
  MieSolution s = detail::prepare_solution(target, omega, n_trunc);
  const double x = s.size_parameter;
  const cdouble m = s.refractive_index;
  const cdouble z = s.interior_argument;

  if (s.permittivity == cdouble(1.0, 0.0)) {
    // Index-matched sphere: the numerators vanish identically.
    s.effective_order = n_trunc;
    return s;
  }

  std::vector<cdouble> d;
  RiccatiTable outer;
  try {
    d = log_derivative(n_trunc, z);
    outer = riccati_xi(n_trunc, x);
  } catch (const RangeError& e) {
    throw RangeError(std::string(e.what()) + " [mie_coefficients, n_trunc = " +
                     std::to_string(n_trunc) + "]");
  }

  s.effective_order = std::min(n_trunc, outer.xi_finite_order);
  for (int n = 1; n <= s.effective_order; ++n) {
    const double nx = n / x;
    const cdouble psi = outer.psi[n];
    const cdouble psi_prev = outer.psi[n - 1];
    const cdouble xi = outer.xi[n];
    const cdouble xi_prev = outer.xi[n - 1];

    const cdouble ta = d[n] / m + nx;
    const cdouble tb = m * d[n] + nx;
    const cdouble an = (ta * psi - psi_prev) / (ta * xi - xi_prev);
    const cdouble bn = (tb * psi - psi_prev) / (tb * xi - xi_prev);
    detail::check_coefficient(an, n, z, "a_n");
    detail::check_coefficient(bn, n, z, "b_n");
    s.a[n - 1] = an;
    s.b[n - 1] = bn;
  }
  return s;
}

/// a_n, b_n from the spherical-Bessel quotient form with explicit 1/eps
/// factors:
///
///   a_n = [j_n(k^V a) d_a(a j_n(k a)) - eps^{-1} j_n(k a) d_a(a j_n(k^V a))]
///       / [j_n(k^V a) d_a(a h_n(k a)) - eps^{-1} h_n(k a) d_a(a j_n(k^V a))]
///
/// and b_n the same without the eps^{-1}. Forms psi_n(k^V a) explicitly, so it
/// is limited to |Im(k^V a)| <= kMaxImagArgument; used as a cross-check of the
/// log-derivative route.
inline MieSolution mie_coefficients_direct(const SphereTarget& target, double omega, int n_trunc) {
  MieSolution s = detail::prepare_solution(target, omega, n_trunc);
  const double x = s.size_parameter;
  const cdouble z = s.interior_argument;
  const cdouble eps = s.permittivity;

  const RiccatiTable inner = riccati_psi(n_trunc, z);
  const RiccatiTable outer = riccati_xi(n_trunc, x);

  s.effective_order = std::min(n_trunc, outer.xi_finite_order);
  for (int n = 1; n <= s.effective_order; ++n) {
    const cdouble j_in = inner.psi[n] / z;
    const cdouble dj_in = inner.psi_prime[n];
    const cdouble j_out = outer.psi[n] / x;
    const cdouble dj_out = outer.psi_prime[n];
    const cdouble h_out = outer.xi[n] / x;
    const cdouble dh_out = outer.xi_prime[n];

    const cdouble an = (j_in * dj_out - j_out * dj_in / eps) / (j_in * dh_out - h_out * dj_in / eps);
    const cdouble bn = (j_in * dj_out - j_out * dj_in) / (j_in * dh_out - h_out * dj_in);
    detail::check_coefficient(an, n, z, "a_n");
    detail::check_coefficient(bn, n, z, "b_n");
    s.a[n - 1] = an;
    s.b[n - 1] = bn;
  }
  return s;
}

struct CrossSections {
  double omega = 0.0;  // rad/s
  double sigma_ext = 0.0;
  double sigma_sca = 0.0;
  double sigma_abs = 0.0;
  double sigma_asym = 0.0;
  double sigma_pr = 0.0;
  // Contribution of the last retained order relative to the series sums.
  double tail_ratio = 0.0;
  bool truncation_warning = false;
};

/// Relative size of the last retained order above which a truncation warning
/// is attached.
inline constexpr double kTruncationTailTolerance = 1e-12;

/// Mie series, summed in ascending order with compensated accumulation:
///
///   sigma_ext  = 2 pi / k^2 sum (2n+1) Re(a_n + b_n)
///   sigma_sca  = 2 pi / k^2 sum (2n+1) (|a_n|^2 + |b_n|^2)
///   sigma_asym = 4 pi / k^2 sum { n(n+2)/(n+1) Re(a_n a*_{n+1} + b_n b*_{n+1})
///                               + (2n+1)/(n(n+1)) Re(a_n b*_n) }
///
/// sigma_abs = ext - sca and sigma_pr = ext - asym.
inline CrossSections cross_sections(const MieSolution& sol) {
  CompensatedSum ext, sca, asym;
  const int nmax = sol.n_trunc;
  for (int n = 1; n <= nmax; ++n) {
    const cdouble an = sol.a[n - 1];
    const cdouble bn = sol.b[n - 1];
    const double w = 2.0 * n + 1.0;
    ext += w * (an.real() + bn.real());
    sca += w * (std::norm(an) + std::norm(bn));
    if (n < nmax) {
      const cdouble an1 = sol.a[n];
      const cdouble bn1 = sol.b[n];
      asym += (n * (n + 2.0) / (n + 1.0)) * (an * std::conj(an1) + bn * std::conj(bn1)).real();
    }
    asym += (w / (n * (n + 1.0))) * (an * std::conj(bn)).real();
  }

  const double k2 = sol.k * sol.k;
  CrossSections cs;
  cs.omega = sol.omega;
  cs.sigma_ext = 2.0 * constants::pi / k2 * ext.value();
  cs.sigma_sca = 2.0 * constants::pi / k2 * sca.value();
  cs.sigma_asym = 4.0 * constants::pi / k2 * asym.value();
  cs.sigma_abs = cs.sigma_ext - cs.sigma_sca;
  cs.sigma_pr = cs.sigma_ext - cs.sigma_asym;

  if (nmax >= 1) {
    const cdouble an = sol.a[nmax - 1];
    const cdouble bn = sol.b[nmax - 1];
    const double w = 2.0 * nmax + 1.0;
    const double ext_tail = w * std::abs(an.real() + bn.real());
    const double sca_tail = w * (std::norm(an) + std::norm(bn));
    double ratio = 0.0;
    if (ext.value() != 0.0) ratio = std::max(ratio, ext_tail / std::abs(ext.value()));
    if (sca.value() != 0.0) ratio = std::max(ratio, sca_tail / std::abs(sca.value()));
    cs.tail_ratio = ratio;
    cs.truncation_warning = ratio > kTruncationTailTolerance;
  }
  return cs;
}

}  // namespace mieforce
