#pragma once

// Riccati-Bessel functions of complex argument.
//
//   psi_n(z) = z j_n(z)          (regular, computed downward)
//   chi_n(x) = -x y_n(x)         (irregular, computed upward, real x only)
//   xi_n(x)  = psi_n(x) - i chi_n(x) = x h_n^(1)(x)
//
// All routines are pure functions of their arguments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mieforce/errors.hpp"

namespace mieforce {

using cdouble = std::complex<double>;

/// Largest accepted |Im z|. psi_n(z) grows like exp(|Im z|) / 2, and double
/// overflows near exp(709.78); 700 leaves room for the polynomial prefactors.
inline constexpr double kMaxImagArgument = 700.0;

struct RiccatiTable {
  int order_max = 0;
  cdouble argument{};
  std::vector<cdouble> psi;        // psi_n,  n = 0..order_max
  std::vector<cdouble> psi_prime;  // psi'_n, n = 0..order_max
  // Filled only by riccati_xi (real positive argument).
  std::vector<cdouble> xi;
  std::vector<cdouble> xi_prime;
  // Highest n whose xi_n is representable; entries above carry an infinite
  // imaginary part. -1 when xi was not requested.
  int xi_finite_order = -1;
};

namespace detail {

inline std::string describe(cdouble z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return os.str();
}

inline void check_domain(cdouble z, int n_max, const char* op) {
  if (n_max < 0) throw DomainError(std::string(op) + ": negative order " + std::to_string(n_max));
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError(std::string(op) + ": non-finite argument z = " + describe(z));
  if (z == cdouble(0.0, 0.0)) throw DomainError(std::string(op) + ": zero argument");
}

inline void check_complex_argument(cdouble z, int n_max, const char* op) {
  check_domain(z, n_max, op);
  if (std::abs(z.imag()) > kMaxImagArgument)
    throw RangeError(std::string(op) + ": exp(|Im z|) overflows for z = " + describe(z) +
                     " (|Im z| limit is " + std::to_string(kMaxImagArgument) + ")");
}

}  // namespace detail

/// Start order for the downward recurrences. It is at least
/// n_max + max(15, ceil|z|), and never starts inside the turning-point
/// region n ~ |z| when n_max < |z| (large interior arguments).
inline int downward_start_order(int n_max, cdouble z) {
  const int mag = static_cast<int>(std::ceil(std::abs(z)));
  return std::max(n_max, mag) + std::max(15, mag);
}

/// D_n(z) = psi'_n(z) / psi_n(z) for n = 0..n_max (index n), by the downward
/// recurrence D_{n-1} = n/z - 1/(D_n + n/z) seeded with D_start = 0. Bounded
/// for any Im z, so no overflow limit applies.
inline std::vector<cdouble> log_derivative(int n_max, cdouble z) {
  detail::check_domain(z, n_max, "log_derivative");
  const int n_start = downward_start_order(n_max, z);
  std::vector<cdouble> d(static_cast<std::size_t>(n_start) + 1, cdouble{});
  for (int n = n_start; n >= 1; --n) {
    const cdouble nz = static_cast<double>(n) / z;
    d[n - 1] = nz - 1.0 / (d[n] + nz);
  }
  d.resize(static_cast<std::size_t>(n_max) + 1);
  return d;
}

/// psi_n(z) and psi'_n(z) for n = 0..n_max.
///
/// Miller's algorithm: the three-term recurrence is run downward from
/// downward_start_order() with an arbitrary seed, then normalized against the
/// closed form psi_0 = sin z (or psi_1 = sin z / z - cos z when |z| >= 1 and
/// psi_1 is the larger of the two, so zeros of sin z do not poison the scale).
/// Entries that fall below the double range underflow to zero.
inline RiccatiTable riccati_psi(int n_max, cdouble z) {
  detail::check_complex_argument(z, n_max, "riccati_psi");

  const int n_start = downward_start_order(n_max, z);
  constexpr double kRescaleAbove = 1e250;

  std::vector<cdouble> p(static_cast<std::size_t>(n_start) + 2, cdouble{});
  p[n_start + 1] = 0.0;
  p[n_start] = 1.0;
  for (int n = n_start; n >= 1; --n) {
    p[n - 1] = (2.0 * n + 1.0) / z * p[n] - p[n + 1];
    if (std::abs(p[n - 1]) > kRescaleAbove) {
      for (int k = n - 1; k <= n_start + 1; ++k) p[k] /= kRescaleAbove;
    }
  }

  const cdouble psi0 = std::sin(z);
  int ref = 0;
  cdouble ref_value = psi0;
  if (std::abs(z) >= 1.0) {
    const cdouble psi1 = psi0 / z - std::cos(z);
    if (std::abs(psi1) > std::abs(psi0)) {
      ref = 1;
      ref_value = psi1;
    }
  }
  const cdouble scale = ref_value / p[ref];

  RiccatiTable t;
  t.order_max = n_max;
  t.argument = z;
  t.psi.resize(static_cast<std::size_t>(n_max) + 1);
  t.psi_prime.resize(t.psi.size());
  for (int n = 0; n <= n_max; ++n) t.psi[n] = p[n] * scale;
  t.psi[0] = psi0;

  t.psi_prime[0] = std::cos(z);
  for (int n = 1; n <= n_max; ++n) {
    t.psi_prime[n] = t.psi[n - 1] - static_cast<double>(n) / z * t.psi[n];
  }
  return t;
}

/// Riccati table for real x > 0 including xi_n(x) = psi_n(x) - i chi_n(x).
/// psi comes from riccati_psi (downward); chi is built upward, which is the
/// stable direction for the irregular solution. Once chi leaves the double
/// range the remaining xi entries are marked infinite (see xi_finite_order).
inline RiccatiTable riccati_xi(int n_max, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("riccati_xi: argument must be positive and finite, got " + std::to_string(x));
  RiccatiTable t = riccati_psi(n_max, cdouble(x, 0.0));
  for (auto& v : t.psi) v = cdouble(v.real(), 0.0);
  for (auto& v : t.psi_prime) v = cdouble(v.real(), 0.0);

  const std::size_t size = static_cast<std::size_t>(n_max) + 1;
  t.xi.assign(size, cdouble{});
  t.xi_prime.assign(size, cdouble{});

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kOverflowGuard = 1e300;

  double chi_prev = std::cos(x);  // chi_0
  double chi = chi_prev;
  t.xi[0] = cdouble(t.psi[0].real(), -chi_prev);
  t.xi_finite_order = 0;
  if (n_max >= 1) {
    chi = std::cos(x) / x + std::sin(x);  // chi_1
    t.xi[1] = cdouble(t.psi[1].real(), -chi);
    t.xi_finite_order = 1;
  }
  for (int n = 2; n <= n_max; ++n) {
    const double next = (2.0 * n - 1.0) / x * chi - chi_prev;
    if (!std::isfinite(next) || std::abs(next) > kOverflowGuard) {
      for (int k = n; k <= n_max; ++k) t.xi[k] = cdouble(t.psi[k].real(), -kInf);
      break;
    }
    chi_prev = chi;
    chi = next;
    t.xi[n] = cdouble(t.psi[n].real(), -chi);
    t.xi_finite_order = n;
  }

  t.xi_prime[0] = cdouble(std::cos(x), std::sin(x));  // d/dx (-i e^{ix})
  for (int n = 1; n <= n_max; ++n) {
    if (n <= t.xi_finite_order) {
      t.xi_prime[n] = t.xi[n - 1] - static_cast<double>(n) / x * t.xi[n];
    } else {
      t.xi_prime[n] = cdouble(t.psi_prime[n].real(), kInf);
    }
  }
  return t;
}

}  // namespace mieforce
