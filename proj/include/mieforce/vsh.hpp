#pragma once

// Vector spherical harmonics X_nm = L Y_nm / sqrt(n(n+1)), L = -i r x grad,
// with Y_nm orthonormal on the sphere and carrying the Condon-Shortley phase
// (Y_{n,-m} = (-1)^m Y*_nm). Every trace and cross-section identity below is
// invariant under a change of this phase convention.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/geometry.hpp"

namespace mieforce {

/// Fully normalized associated Legendre functions at one polar angle,
/// 0 <= m <= n <= n_max, such that Y_nm = p(n, m) e^{i m phi} for m >= 0.
/// Besides p it stores p / sin(theta) (m >= 1) and dp / dtheta, both built by
/// their own recurrences so they stay finite at the poles.
class LegendreTable {
 public:
  LegendreTable(int n_max, double theta) : n_max_(n_max) {
    const std::size_t size = static_cast<std::size_t>((n_max + 1) * (n_max + 2) / 2);
    p_.assign(size, 0.0);
    u_.assign(size, 0.0);
    dp_.assign(size, 0.0);

    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    // m = 0 column.
    p_[idx(0, 0)] = 1.0 / std::sqrt(4.0 * constants::pi);
    if (n_max >= 1) p_[idx(1, 0)] = std::sqrt(3.0) * ct * p_[idx(0, 0)];
    for (int n = 2; n <= n_max; ++n) column_step(p_, n, 0, ct);

    // u = p / sin(theta) for m >= 1.
    for (int m = 1; m <= n_max; ++m) {
      if (m == 1) {
        u_[idx(1, 1)] = -std::sqrt(1.5) / std::sqrt(4.0 * constants::pi);
      } else {
        u_[idx(m, m)] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * u_[idx(m - 1, m - 1)];
      }
      if (m + 1 <= n_max) u_[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * ct * u_[idx(m, m)];
      for (int n = m + 2; n <= n_max; ++n) column_step(u_, n, m, ct);
      for (int n = m; n <= n_max; ++n) p_[idx(n, m)] = st * u_[idx(n, m)];
    }

    for (int n = 1; n <= n_max; ++n) {
      dp_[idx(n, 0)] = std::sqrt(n * (n + 1.0)) * p_[idx(n, 1)];
      for (int m = 1; m <= n; ++m) {
        const double lower = (n - 1 >= m) ? u_[idx(n - 1, m)] : 0.0;
        dp_[idx(n, m)] = n * ct * u_[idx(n, m)] -
                         std::sqrt((2.0 * n + 1.0) / (2.0 * n - 1.0) * (n * n - m * m)) * lower;
      }
    }
  }

  int n_max() const noexcept { return n_max_; }
  double p(int n, int m) const { return p_[idx(n, m)]; }
  double p_over_sin(int n, int m) const { return u_[idx(n, m)]; }
  double dp_dtheta(int n, int m) const { return dp_[idx(n, m)]; }

 private:
  static std::size_t idx(int n, int m) { return static_cast<std::size_t>(n * (n + 1) / 2 + m); }

  static void column_step(std::vector<double>& v, int n, int m, double ct) {
    const double nn = static_cast<double>(n) * n;
    const double mm = static_cast<double>(m) * m;
    const double a = std::sqrt((4.0 * nn - 1.0) / (nn - mm));
    const double n1 = n - 1.0;
    const double b = std::sqrt((n1 * n1 - mm) / (4.0 * n1 * n1 - 1.0));
    v[idx(n, m)] = a * (ct * v[idx(n - 1, m)] - b * v[idx(n - 2, m)]);
  }

  int n_max_;
  std::vector<double> p_;
  std::vector<double> u_;
  std::vector<double> dp_;
};

/// Flat position of (n, m) in a basis ordered by n, then m = -n..n.
inline int vsh_index(int n, int m) { return n * n - 1 + (m + n); }
inline int vsh_count(int n_max) { return n_max * n_max + 2 * n_max; }

/// X_nm(dir) for every 1 <= n <= n_max, |m| <= n, in vsh_index order.
inline std::vector<CVec3> vsh_basis(int n_max, const Vec3& dir) {
  if (n_max < 1) throw DomainError("vsh_basis: n_max must be >= 1");
  const Vec3 d = normalized_axis(dir);
  const auto [theta, phi] = spherical_angles(d);
  const LegendreTable leg(n_max, theta);

  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const Vec3 theta_hat(ct * std::cos(phi), ct * std::sin(phi), -st);
  const Vec3 phi_hat(-std::sin(phi), std::cos(phi), 0.0);
  const std::complex<double> I(0.0, 1.0);

  std::vector<CVec3> out(static_cast<std::size_t>(vsh_count(n_max)));
  for (int n = 1; n <= n_max; ++n) {
    const double norm = 1.0 / std::sqrt(n * (n + 1.0));
    for (int m = -n; m <= n; ++m) {
      const int am = std::abs(m);
      const double sign = (m < 0 && (am % 2 == 1)) ? -1.0 : 1.0;
      const std::complex<double> phase = sign * std::polar(1.0, m * phi);
      const std::complex<double> c_theta = (am == 0) ? 0.0 : -static_cast<double>(m) * leg.p_over_sin(n, am) * phase;
      const std::complex<double> c_phi = -I * leg.dp_dtheta(n, am) * phase;
      out[static_cast<std::size_t>(vsh_index(n, m))] =
          norm * (c_theta * theta_hat.cast<std::complex<double>>() + c_phi * phi_hat.cast<std::complex<double>>());
    }
  }
  return out;
}

/// Single X_nm(dir).
inline CVec3 vector_spherical_harmonic(int n, int m, const Vec3& dir) {
  if (n < 1 || std::abs(m) > n)
    throw DomainError("vector_spherical_harmonic: invalid indices (n = " + std::to_string(n) +
                      ", m = " + std::to_string(m) + ")");
  return vsh_basis(n, dir)[static_cast<std::size_t>(vsh_index(n, m))];
}

}  // namespace mieforce
