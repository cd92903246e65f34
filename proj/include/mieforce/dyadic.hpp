#pragma once

// Far-field scattering dyadic of a sphere in the vector-spherical-harmonic
// basis,
//
//   S(m|n) = (4 pi i / k) sum_{n,m} [ a_n (m x X_nm(m)) (n x X*_nm(n))
//                                   + b_n X_nm(m) X*_nm(n) ],
//
// and the quadratures that map its traces onto cross-sections.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/geometry.hpp"
#include "mieforce/mie.hpp"
#include "mieforce/quadrature.hpp"
#include "mieforce/vsh.hpp"

namespace mieforce {

struct DyadicSample {
  Vec3 out_dir;
  Vec3 in_dir;
  Mat3c matrix;  // m
};

/// S(m|n) = sum_j c_j u_j(m) conj(u_j(n))^T with u_j = dir x X_nm (TM block,
/// c_j = 4 pi i a_n / k) followed by u_j = X_nm (TE block, c_j = 4 pi i b_n / k).
class DyadicExpansion {
 public:
  DyadicExpansion(const MieSolution& sol, int n_trunc) : k_(sol.k) {
    if (n_trunc < 1) throw ConfigError("dyadic truncation must be >= 1");
    order_ = std::min(n_trunc, sol.n_trunc);
    const int count = vsh_count(order_);
    coeffs_.assign(static_cast<std::size_t>(2 * count), cdouble{});
    m_index_.assign(coeffs_.size(), 0);
    const cdouble pre(0.0, 4.0 * constants::pi / sol.k);
    for (int n = 1; n <= order_; ++n) {
      for (int m = -n; m <= n; ++m) {
        const auto j = static_cast<std::size_t>(vsh_index(n, m));
        coeffs_[j] = pre * sol.a_n(n);
        coeffs_[j + static_cast<std::size_t>(count)] = pre * sol.b_n(n);
        m_index_[j] = m;
        m_index_[j + static_cast<std::size_t>(count)] = m;
      }
    }
  }

  int order() const noexcept { return order_; }
  double k() const noexcept { return k_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  const std::vector<cdouble>& coefficients() const noexcept { return coeffs_; }
  int m_index(std::size_t j) const { return m_index_[j]; }

  std::vector<CVec3> basis(const Vec3& dir) const {
    const Vec3 d = normalized_axis(dir);
    const std::vector<CVec3> x = vsh_basis(order_, d);
    std::vector<CVec3> u(2 * x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      u[j] = cross(d, x[j]);
      u[j + x.size()] = x[j];
    }
    return u;
  }

  /// Right factors c_j conj(u_j(n)) for a fixed incidence direction.
  std::vector<CVec3> incidence_factors(const std::vector<CVec3>& in_basis) const {
    std::vector<CVec3> w(in_basis.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = coeffs_[j] * in_basis[j].conjugate();
    return w;
  }

  static Mat3c evaluate(const std::vector<CVec3>& out_basis, const std::vector<CVec3>& factors) {
    Mat3c s = Mat3c::Zero();
    for (std::size_t j = 0; j < factors.size(); ++j) s.noalias() += out_basis[j] * factors[j].transpose();
    return s;
  }

  Mat3c operator()(const Vec3& out_dir, const Vec3& in_dir) const {
    return evaluate(basis(out_dir), incidence_factors(basis(in_dir)));
  }

  /// tr S(n|n).
  cdouble forward_trace(const std::vector<CVec3>& in_basis) const {
    cdouble t{};
    for (std::size_t j = 0; j < coeffs_.size(); ++j) t += coeffs_[j] * in_basis[j].squaredNorm();
    return t;
  }

 private:
  double k_;
  int order_ = 0;
  std::vector<cdouble> coeffs_;
  std::vector<int> m_index_;
};

inline DyadicSample assemble_dyadic(const MieSolution& sol, const Vec3& out_dir, const Vec3& in_dir,
                                    int n_trunc) {
  const DyadicExpansion e(sol, n_trunc);
  return {normalized_axis(out_dir), normalized_axis(in_dir), e(out_dir, in_dir)};
}

/// Product grid that integrates tr[S S^dagger] times a linear factor of the
/// outgoing direction exactly for multipoles up to `order`.
inline DirectionGrid exact_outgoing_grid(int order, const Vec3& axis = Vec3::UnitZ()) {
  return build_axis_grid(axis, order + 2, 2 * order + 4);
}

struct TraceCrossSections {
  CrossSections sections;
  double quadrature_change = 0.0;  // relative change under grid doubling
  int n_theta = 0;
  int n_phi = 0;
};

namespace detail {

struct TraceIntegrals {
  double sca = 0.0;
  double asym = 0.0;
};

inline TraceIntegrals trace_integrals(const DyadicExpansion& e, const std::vector<CVec3>& factors,
                                      const Vec3& incidence, const DirectionGrid& grid) {
  CompensatedSum sca, asym;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Mat3c s = DyadicExpansion::evaluate(e.basis(grid.nodes[i]), factors);
    const double t = s.squaredNorm();  // tr[S S^dagger]
    sca.add(grid.weights[i] * t);
    asym.add(grid.weights[i] * incidence.dot(grid.nodes[i]) * t);
  }
  return {0.5 * sca.value(), 0.5 * asym.value()};
}

}  // namespace detail

/// Cross-sections from dyadic traces:
///   2 sigma_ext  = (4 pi / k) Im tr S(n|n)
///   2 sigma_sca  = int do_m tr[S(m|n) S^dagger(m|n)]
///   2 sigma_asym = int do_m (n.m) tr[S(m|n) S^dagger(m|n)]
/// The quadrature starts on `grid` and is doubled until successive results
/// agree to `tolerance`; AccuracyError otherwise.
inline TraceCrossSections trace_cross_sections(const MieSolution& sol, const DirectionGrid& grid,
                                               const Vec3& incidence = Vec3::UnitZ(),
                                               double tolerance = 1e-8, int max_doublings = 3) {
  const DyadicExpansion e(sol, sol.n_trunc);
  const Vec3 n = normalized_axis(incidence);
  const std::vector<CVec3> in_basis = e.basis(n);
  const std::vector<CVec3> factors = e.incidence_factors(in_basis);

  TraceCrossSections out;
  CrossSections& cs = out.sections;
  cs.omega = sol.omega;
  cs.sigma_ext = 0.5 * (4.0 * constants::pi / sol.k) * e.forward_trace(in_basis).imag();

  auto coarse = detail::trace_integrals(e, factors, n, grid);
  int n_theta = grid.n_theta;
  int n_phi = grid.n_phi;
  double change = 0.0;
  bool converged = false;
  for (int level = 1; level <= max_doublings; ++level) {
    n_theta *= 2;
    n_phi *= 2;
    const auto fine = detail::trace_integrals(e, factors, n, build_axis_grid(grid.axis, n_theta, n_phi));
    const double scale = std::max({std::abs(fine.sca), std::abs(fine.asym), 1e-300});
    change = std::max(std::abs(fine.sca - coarse.sca), std::abs(fine.asym - coarse.asym)) / scale;
    coarse = fine;
    if (change <= tolerance || fine.sca == 0.0) {
      converged = true;
      break;
    }
  }
  if (!converged) throw AccuracyError("trace_cross_sections: quadrature not converged", change);

  cs.sigma_sca = coarse.sca;
  cs.sigma_asym = coarse.asym;
  cs.sigma_abs = cs.sigma_ext - cs.sigma_sca;
  cs.sigma_pr = cs.sigma_ext - cs.sigma_asym;
  out.quadrature_change = change;
  out.n_theta = n_theta;
  out.n_phi = n_phi;
  return out;
}

/// Momentum-transfer vector of a plane wave incident along n,
///
///   P(n) = n (4 pi / k) Im tr S(n|n) - int do_m m tr[S(m|n) S^dagger(m|n)],
///
/// the bracket of the radiation-pressure functional. The outgoing integral is
/// reorganized through the Gram tensors
///   G_jl = int do_m m (u_j(m) . conj(u_l(m)))
/// computed once on an exact grid, so each incidence direction costs one basis
/// evaluation plus a sparse contraction (G_jl vanishes unless |m_j - m_l| <= 1).
class MomentumTransferOperator {
 public:
  explicit MomentumTransferOperator(const MieSolution& sol)
      : expansion_(sol, sol.n_trunc) {
    const DirectionGrid grid = exact_outgoing_grid(expansion_.order());
    const std::size_t size = expansion_.size();
    const auto& c = expansion_.coefficients();

    for (std::size_t j = 0; j < size; ++j) {
      for (std::size_t l = 0; l < size; ++l) {
        if (std::abs(expansion_.m_index(j) - expansion_.m_index(l)) > 1) continue;
        const cdouble cc = c[j] * std::conj(c[l]);
        if (cc == cdouble{}) continue;
        pairs_.push_back({j, l, cc, CVec3::Zero()});
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::vector<CVec3> u = expansion_.basis(grid.nodes[i]);
      const CVec3 mw = (grid.weights[i] * grid.nodes[i]).cast<cdouble>();
      // Eigen's dot conjugates its left operand: u_l.dot(u_j) = u_j . conj(u_l).
      for (auto& p : pairs_) p.gram += u[p.l].dot(u[p.j]) * mw;
    }
  }

  const DyadicExpansion& expansion() const noexcept { return expansion_; }

  /// Extinction part (4 pi / k) Im tr S(n|n), equal to 2 sigma_ext for spheres.
  double extinction(const std::vector<CVec3>& in_basis) const {
    return 4.0 * constants::pi / expansion_.k() * expansion_.forward_trace(in_basis).imag();
  }

  /// int do_m m tr[S S^dagger].
  Vec3 reradiated(const std::vector<CVec3>& in_basis) const {
    CVec3 acc = CVec3::Zero();
    for (const auto& p : pairs_) {
      // conj(u_j(n)) . u_l(n)
      const cdouble h = in_basis[p.j].dot(in_basis[p.l]);
      acc += (p.coeff * h) * p.gram;
    }
    return acc.real();
  }

  Vec3 operator()(const Vec3& incidence) const {
    const Vec3 n = normalized_axis(incidence);
    const std::vector<CVec3> in_basis = expansion_.basis(n);
    return extinction(in_basis) * n - reradiated(in_basis);
  }

 private:
  struct Pair {
    std::size_t j;
    std::size_t l;
    cdouble coeff;  // c_j conj(c_l)
    CVec3 gram;     // int do_m m (u_j . conj(u_l))
  };

  DyadicExpansion expansion_;
  std::vector<Pair> pairs_;
};

/// Same bracket by direct quadrature of S(m|n) on `grid`; O(size) per node.
inline Vec3 momentum_transfer_direct(const DyadicExpansion& e, const Vec3& incidence, const DirectionGrid& grid) {
  const Vec3 n = normalized_axis(incidence);
  const std::vector<CVec3> in_basis = e.basis(n);
  const std::vector<CVec3> factors = e.incidence_factors(in_basis);
  const double ext = 4.0 * constants::pi / e.k() * e.forward_trace(in_basis).imag();
  const Vec3 re = integrate_direction(grid, [&](const Vec3& m) -> Vec3 {
    return DyadicExpansion::evaluate(e.basis(m), factors).squaredNorm() * m;
  });
  return ext * n - re;
}

}  // namespace mieforce
