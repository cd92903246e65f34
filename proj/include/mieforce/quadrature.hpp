#pragma once

// Quadrature over the unit sphere of directions and over a frequency band.

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/geometry.hpp"
#include "mieforce/summation.hpp"

namespace mieforce {

struct GaussLegendreRule {
  std::vector<double> nodes;  // ascending, in (-1, 1)
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n. Nodes
/// are placed in mirrored pairs so odd moments vanish to rounding.
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre: need at least one node, got " + std::to_string(n));
  GaussLegendreRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (2 * i + 1 == n) x = 0.0;
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

/// Product rule over the unit sphere: Gauss-Legendre in cos(theta) times the
/// uniform rule in phi, measured from `axis`. With a split angle the polar
/// range is divided at theta = split and each piece gets its own n_theta-point
/// rule, which keeps caps with a sharp edge exact.
struct DirectionGrid {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int n_theta = 0;
  int n_phi = 0;
  Vec3 axis = Vec3::UnitZ();
  std::optional<double> split_theta;

  std::size_t size() const noexcept { return nodes.size(); }

  std::string describe() const {
    std::string s = "gauss-legendre x uniform (" + std::to_string(n_theta) + ", " + std::to_string(n_phi) + ")";
    if (split_theta) s += " split at theta = " + std::to_string(*split_theta);
    return s;
  }
};

inline DirectionGrid build_axis_grid(const Vec3& axis, int n_theta, int n_phi,
                                     std::optional<double> split_theta = std::nullopt) {
  if (n_theta < 2 || n_phi < 4)
    throw ConfigError("direction grid needs n_theta >= 2 and n_phi >= 4, got (" + std::to_string(n_theta) +
                      ", " + std::to_string(n_phi) + ")");
  if (split_theta && !(*split_theta > 0.0 && *split_theta < constants::pi))
    throw ConfigError("direction grid split angle must lie in (0, pi)");

  const Frame frame = frame_about(axis);
  const GaussLegendreRule gl = gauss_legendre(n_theta);

  // (lower, upper) cos(theta) segments.
  std::vector<std::pair<double, double>> segments;
  if (split_theta) {
    const double c = std::cos(*split_theta);
    segments = {{-1.0, c}, {c, 1.0}};
  } else {
    segments = {{-1.0, 1.0}};
  }

  DirectionGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.axis = frame.e3;
  g.split_theta = split_theta;
  const double dphi = 2.0 * constants::pi / n_phi;
  g.nodes.reserve(segments.size() * static_cast<std::size_t>(n_theta * n_phi));
  g.weights.reserve(g.nodes.capacity());
  for (const auto& [lo, hi] : segments) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int i = 0; i < n_theta; ++i) {
      const double ct = mid + half * gl.nodes[static_cast<std::size_t>(i)];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      const double wt = half * gl.weights[static_cast<std::size_t>(i)] * dphi;
      for (int j = 0; j < n_phi; ++j) {
        const double phi = dphi * j;
        const Vec3 local(st * std::cos(phi), st * std::sin(phi), ct);
        g.nodes.push_back(frame.to_world(local));
        g.weights.push_back(wt);
      }
    }
  }
  return g;
}

/// Exact for spherical harmonics up to degree min(2 n_theta - 1, n_phi - 1).
inline DirectionGrid build_direction_grid(int n_theta, int n_phi) {
  return build_axis_grid(Vec3::UnitZ(), n_theta, n_phi);
}

/// Grid of a single direction carrying the whole weight; the angular analogue
/// of a delta function (used for idealized paraxial beams).
inline DirectionGrid single_direction_grid(const Vec3& dir, double solid_angle) {
  if (!(solid_angle > 0.0)) throw DegenerateInputError("single-direction grid needs a positive solid angle");
  DirectionGrid g;
  g.axis = normalized_axis(dir);
  g.nodes = {g.axis};
  g.weights = {solid_angle};
  g.n_theta = 1;
  g.n_phi = 1;
  return g;
}

namespace detail {

template <class T>
struct Accumulator;

template <>
struct Accumulator<double> {
  CompensatedSum sum;
  void add(double w, double v) { sum.add(w * v); }
  double value() const { return sum.value(); }
};

template <>
struct Accumulator<Vec3> {
  CompensatedSum x, y, z;
  void add(double w, const Vec3& v) {
    x.add(w * v.x());
    y.add(w * v.y());
    z.add(w * v.z());
  }
  Vec3 value() const { return {x.value(), y.value(), z.value()}; }
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Vec3& v) { return v.norm(); }

}  // namespace detail

/// Weighted sum of f over the grid nodes in node order. f returns a real or
/// a Vec3; vectors are integrated componentwise.
template <class F>
auto integrate_direction(const DirectionGrid& grid, F&& f) {
  using R = std::decay_t<decltype(f(std::declval<const Vec3&>()))>;
  using Value = std::conditional_t<std::is_arithmetic_v<R>, double, Vec3>;
  detail::Accumulator<Value> acc;
  for (std::size_t i = 0; i < grid.size(); ++i) acc.add(grid.weights[i], Value(f(grid.nodes[i])));
  return acc.value();
}

template <class T>
struct ConvergedIntegral {
  T value;
  double relative_change = 0.0;  // |fine - coarse| / max(|fine|, scale)
  int n_theta = 0;
  int n_phi = 0;
};

/// Integrates on (n_theta, n_phi) and on successively doubled grids until two
/// consecutive results agree to `tolerance` relative to max(|result|, scale).
/// Throws AccuracyError after `max_doublings` refinements.
template <class F>
auto integrate_direction_converged(F&& f, int n_theta = 64, int n_phi = 128, double tolerance = 1e-8,
                                   double scale = 0.0, int max_doublings = 3, const Vec3& axis = Vec3::UnitZ()) {
  using Value = decltype(integrate_direction(build_direction_grid(2, 4), f));
  Value coarse = integrate_direction(build_axis_grid(axis, n_theta, n_phi), f);
  double change = 0.0;
  for (int level = 1; level <= max_doublings; ++level) {
    n_theta *= 2;
    n_phi *= 2;
    Value fine = integrate_direction(build_axis_grid(axis, n_theta, n_phi), f);
    const double denom = std::max(detail::magnitude(fine), scale);
    change = denom > 0.0 ? detail::magnitude(Value(fine - coarse)) / denom : 0.0;
    if (change <= tolerance) return ConvergedIntegral<Value>{fine, change, n_theta, n_phi};
    coarse = fine;
  }
  throw AccuracyError("direction quadrature did not converge to " + std::to_string(tolerance), change);
}

struct SpectralGrid {
  enum class Scheme { GaussLegendre, Delta };
  std::vector<double> nodes;    // rad/s
  std::vector<double> weights;  // rad/s
  double lower = 0.0;
  double upper = 0.0;
  Scheme scheme = Scheme::GaussLegendre;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule on [lower, upper] (rad/s).
inline SpectralGrid build_spectral_grid(double lower, double upper, int n) {
  if (!(lower > 0.0) || !(upper > lower))
    throw ConfigError("spectral band must satisfy 0 < lower < upper");
  const GaussLegendreRule gl = gauss_legendre(n);
  SpectralGrid g;
  g.lower = lower;
  g.upper = upper;
  const double half = 0.5 * (upper - lower);
  const double mid = 0.5 * (upper + lower);
  for (int i = 0; i < n; ++i) {
    g.nodes.push_back(mid + half * gl.nodes[static_cast<std::size_t>(i)]);
    g.weights.push_back(half * gl.weights[static_cast<std::size_t>(i)]);
  }
  return g;
}

/// Single node at omega0 carrying the integrated bandwidth.
inline SpectralGrid delta_spectral_grid(double omega0, double bandwidth) {
  if (!(omega0 > 0.0)) throw ConfigError("spectral centre must be positive");
  if (!(bandwidth > 0.0)) throw DegenerateInputError("zero spectral bandwidth");
  SpectralGrid g;
  g.nodes = {omega0};
  g.weights = {bandwidth};
  g.lower = g.upper = omega0;
  g.scheme = SpectralGrid::Scheme::Delta;
  return g;
}

}  // namespace mieforce
