#pragma once

// Radiation-pressure functional of a frequency- and direction-resolved photon
// number, the drive-minus-recoil force on a sphere and the narrowband
// quantum-pressure estimate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mieforce/constants.hpp"
#include "mieforce/dyadic.hpp"
#include "mieforce/errors.hpp"
#include "mieforce/geometry.hpp"
#include "mieforce/mie.hpp"
#include "mieforce/parallel.hpp"
#include "mieforce/quadrature.hpp"
#include "mieforce/summation.hpp"

namespace mieforce {

// ---------------------------------------------------------------------------
// Envelopes

struct IsotropicEnvelope {};
/// g = exp(-theta^2 / (2 sigma^2)), theta measured from the axis.
struct GaussianCap {
  double sigma = 0.0;  // rad
};
/// g = 1 for theta <= theta_max, 0 outside.
struct TopHatCap {
  double theta_max = 0.0;  // rad
};
/// All squeezing carried by the axis direction itself with effective solid
/// angle `solid_angle`: the paraxial-beam idealization.
struct ParaxialBeam {
  double solid_angle = 0.0;  // sr
};
using AngularEnvelope = std::variant<IsotropicEnvelope, GaussianCap, TopHatCap, ParaxialBeam>;

/// Flat band of integrated width `bandwidth` concentrated at omega0.
struct DeltaBand {
  double omega0 = 0.0;     // rad/s
  double bandwidth = 0.0;  // rad/s
};
/// h = exp(-(omega - omega0)^2 / (2 sigma^2)).
struct GaussianBand {
  double omega0 = 0.0;  // rad/s
  double sigma = 0.0;   // rad/s
};
using SpectralEnvelope = std::variant<DeltaBand, GaussianBand>;

/// Number of standard deviations kept on each side of Gaussian envelopes.
inline constexpr double kGaussianSpan = 8.0;

/// r0 for a quadrature noise reduction given in dB: ln(10^{dB/20}).
inline double squeezing_from_db(double db) { return db * std::log(10.0) / 20.0; }

inline std::string describe(const AngularEnvelope& a) {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IsotropicEnvelope>) return "isotropic";
        else if constexpr (std::is_same_v<T, GaussianCap>) return "gaussian_cap(sigma=" + std::to_string(e.sigma) + ")";
        else if constexpr (std::is_same_v<T, TopHatCap>) return "top_hat_cap(theta_max=" + std::to_string(e.theta_max) + ")";
        else return "paraxial(solid_angle=" + std::to_string(e.solid_angle) + ")";
      },
      a);
}

/// r_omega(n) = r0 g(n) h(omega), 0 <= g, h <= 1.
struct SqueezingProfile {
  double r0 = 0.0;
  Vec3 axis = Vec3::UnitZ();
  AngularEnvelope angular = IsotropicEnvelope{};
  SpectralEnvelope spectral = DeltaBand{};

  void validate() const {
    if (!(r0 >= 0.0) || !std::isfinite(r0)) throw DomainError("squeezing parameter r0 must be >= 0");
    normalized_axis(axis);
    std::visit(
        [](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, GaussianCap>) {
            if (!(e.sigma > 0.0)) throw DegenerateInputError("gaussian cap needs sigma > 0");
          } else if constexpr (std::is_same_v<T, TopHatCap>) {
            if (!(e.theta_max > 0.0)) throw DegenerateInputError("top-hat cap needs theta_max > 0");
            if (e.theta_max > constants::pi) throw ConfigError("top-hat cap theta_max exceeds pi");
          } else if constexpr (std::is_same_v<T, ParaxialBeam>) {
            if (!(e.solid_angle > 0.0)) throw DegenerateInputError("paraxial beam needs a positive solid angle");
            if (e.solid_angle > 4.0 * constants::pi) throw ConfigError("paraxial solid angle exceeds 4 pi");
          }
        },
        angular);
    std::visit(
        [](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if (!(e.omega0 > 0.0) || !std::isfinite(e.omega0)) throw ConfigError("spectral centre must be positive");
          if constexpr (std::is_same_v<T, DeltaBand>) {
            if (!(e.bandwidth > 0.0)) throw DegenerateInputError("zero spectral bandwidth");
          } else {
            if (!(e.sigma > 0.0)) throw DegenerateInputError("zero spectral bandwidth");
            if (!(e.omega0 - kGaussianSpan * e.sigma > 0.0))
              throw ConfigError("gaussian band reaches omega <= 0; narrow it");
          }
        },
        spectral);
  }

  double center_frequency() const {
    return std::visit([](const auto& e) { return e.omega0; }, spectral);
  }

  /// g(n). The paraxial envelope is 1 on the axis and 0 elsewhere.
  double angular_value(const Vec3& n) const {
    const Vec3 a = normalized_axis(axis);
    return std::visit(
        [&](const auto& e) -> double {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, IsotropicEnvelope>) {
            return 1.0;
          } else if constexpr (std::is_same_v<T, GaussianCap>) {
            const double t = angle_between(a, n);
            return std::exp(-0.5 * (t / e.sigma) * (t / e.sigma));
          } else if constexpr (std::is_same_v<T, TopHatCap>) {
            return angle_between(a, n) <= e.theta_max ? 1.0 : 0.0;
          } else {
            return angle_between(a, n) <= 1e-12 ? 1.0 : 0.0;
          }
        },
        angular);
  }

  /// h(omega). The delta band is 1 at its centre and 0 elsewhere.
  double spectral_value(double omega) const {
    return std::visit(
        [&](const auto& e) -> double {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, DeltaBand>) {
            return omega == e.omega0 ? 1.0 : 0.0;
          } else {
            const double t = (omega - e.omega0) / e.sigma;
            return std::exp(-0.5 * t * t);
          }
        },
        spectral);
  }

  double squeezing(double omega, const Vec3& n) const { return r0 * angular_value(n) * spectral_value(omega); }

  /// Stationary photon number sinh^2 r of the squeezed vacuum.
  double photon_number(double omega, const Vec3& n) const {
    const double s = std::sinh(squeezing(omega, n));
    return s * s;
  }
};

/// Bose-Einstein occupation of the emitter at temperature T.
struct ThermalState {
  double temperature = 0.0;  // K

  void validate() const {
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be >= 0 K");
  }

  double occupation(double omega) const {
    if (temperature == 0.0) return 0.0;
    const double x = constants::hbar * omega / (constants::boltzmann * temperature);
    return 1.0 / std::expm1(x);
  }
};

// ---------------------------------------------------------------------------
// Functional

enum class FunctionalMode { SphereReduced, Dyadic };

inline std::string to_string(FunctionalMode m) { return m == FunctionalMode::Dyadic ? "dyadic" : "sphere_reduced"; }

inline FunctionalMode parse_functional_mode(const std::string& s) {
  if (s == "sphere_reduced") return FunctionalMode::SphereReduced;
  if (s == "dyadic") return FunctionalMode::Dyadic;
  throw ConfigError("functional mode must be 'sphere_reduced' or 'dyadic', got '" + s + "'");
}

using WeightFunction = std::function<double(double omega, const Vec3& n)>;
using SolutionProvider = std::function<MieSolution(double omega)>;

struct FunctionalOptions {
  FunctionalMode mode = FunctionalMode::SphereReduced;
  int threads = 1;
  // Dyadic mode refuses larger spheres unless this is raised.
  double dyadic_max_size_parameter = 5.0;
};

struct FunctionalValue {
  Vec3 force = Vec3::Zero();  // N
  // Force the same weight would give if all momentum were transferred along
  // one direction; the reference for relative residuals.
  double scale = 0.0;  // N
};

namespace detail {

inline double checked_weight(const WeightFunction& w, double omega, const Vec3& n) {
  const double v = w(omega, n);
  if (!std::isfinite(v)) throw DomainError("weight is not finite");
  if (v < 0.0) throw DomainError("weight is negative (" + std::to_string(v) + ")");
  return v;
}

inline double prefactor(double omega) {
  const double k = omega / constants::speed_of_light;
  return constants::hbar * k * k * k / (4.0 * constants::pi * constants::pi * constants::pi);
}

struct VectorSum {
  CompensatedSum x, y, z;
  void add(const Vec3& v) {
    x.add(v.x());
    y.add(v.y());
    z.add(v.z());
  }
  Vec3 value() const { return {x.value(), y.value(), z.value()}; }
};

}  // namespace detail

/// F[w] = int d omega (hbar k^3 / 8 pi^3) int do_n w(omega, n) P(n), where
/// P(n) is the momentum-transfer vector of a plane wave along n. In
/// sphere_reduced mode P(n) = 2 sigma_pr n; in dyadic mode P(n) is evaluated
/// from the scattering dyadic. Partial sums are merged in node order, so the
/// result does not depend on the thread count.
inline FunctionalValue radiation_pressure_functional(const WeightFunction& weight, const SolutionProvider& provider,
                                                     const SpectralGrid& sgrid, const DirectionGrid& dgrid,
                                                     const FunctionalOptions& options = {}) {
  if (sgrid.size() == 0 || dgrid.size() == 0) throw ConfigError("functional needs non-empty grids");

  struct Partial {
    Vec3 force = Vec3::Zero();
    double scale = 0.0;
  };
  std::vector<Partial> partials;

  if (options.mode == FunctionalMode::SphereReduced) {
    partials = parallel_map(sgrid.size(), options.threads, [&](std::size_t s) {
      const double omega = sgrid.nodes[s];
      detail::VectorSum moment;
      CompensatedSum total;
      for (std::size_t i = 0; i < dgrid.size(); ++i) {
        const double w = detail::checked_weight(weight, omega, dgrid.nodes[i]) * dgrid.weights[i];
        moment.add(w * dgrid.nodes[i]);
        total.add(w);
      }
      Partial p;
      if (total.value() == 0.0) return p;
      const double sigma_pr = cross_sections(provider(omega)).sigma_pr;
      const double f = sgrid.weights[s] * detail::prefactor(omega) * sigma_pr;
      p.force = f * moment.value();
      p.scale = std::abs(f) * total.value();
      return p;
    });
  } else {
    partials.reserve(sgrid.size());
    for (std::size_t s = 0; s < sgrid.size(); ++s) {
      const double omega = sgrid.nodes[s];
      std::vector<double> w(dgrid.size());
      bool any = false;
      for (std::size_t i = 0; i < dgrid.size(); ++i) {
        w[i] = detail::checked_weight(weight, omega, dgrid.nodes[i]) * dgrid.weights[i];
        any = any || w[i] != 0.0;
      }
      if (!any) {
        partials.push_back({});
        continue;
      }
      const MieSolution sol = provider(omega);
      if (sol.size_parameter > options.dyadic_max_size_parameter)
        throw ConfigError("dyadic mode limited to x <= " + std::to_string(options.dyadic_max_size_parameter) +
                          " (x = " + std::to_string(sol.size_parameter) + "); use sphere_reduced");
      const MomentumTransferOperator op(sol);
      const auto values = parallel_map(dgrid.size(), options.threads, [&](std::size_t i) -> Vec3 {
        return w[i] == 0.0 ? Vec3::Zero() : Vec3(w[i] * op(dgrid.nodes[i]));
      });
      detail::VectorSum acc;
      CompensatedSum mag;
      for (const Vec3& v : values) {
        acc.add(v);
        mag.add(v.norm());
      }
      const double f = sgrid.weights[s] * 0.5 * detail::prefactor(omega);
      partials.push_back({f * acc.value(), std::abs(f) * mag.value()});
    }
  }

  detail::VectorSum force;
  CompensatedSum scale;
  for (const auto& p : partials) {
    force.add(p.force);
    scale.add(p.scale);
  }
  return {force.value(), scale.value()};
}

// ---------------------------------------------------------------------------
// Quantum pressure

struct QuantumPressure {
  double omega0 = 0.0;           // rad/s
  double k0 = 0.0;               // 1/m
  double r0 = 0.0;
  double bandwidth_eff = 0.0;    // rad/s
  double solid_angle_eff = 0.0;  // sr
  double P_sq = 0.0;             // N/m^2
  bool broadband_warning = false;
};

/// Fractional bandwidth above which the narrowband estimate is flagged.
inline constexpr double kBroadbandThreshold = 0.1;

/// P_sq = (hbar k0^3 / 4 pi^3) sinh^2(r0) d_omega d_o.
inline QuantumPressure quantum_pressure(double omega0, double r0, double bandwidth_eff, double solid_angle_eff) {
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw DomainError("quantum_pressure: omega0 must be positive");
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw DomainError("quantum_pressure: r0 must be >= 0");
  if (!(bandwidth_eff > 0.0)) throw DegenerateInputError("quantum_pressure: zero bandwidth");
  if (!(solid_angle_eff > 0.0)) throw DegenerateInputError("quantum_pressure: zero solid angle");
  QuantumPressure q;
  q.omega0 = omega0;
  q.k0 = omega0 / constants::speed_of_light;
  q.r0 = r0;
  q.bandwidth_eff = bandwidth_eff;
  q.solid_angle_eff = solid_angle_eff;
  const double s = std::sinh(r0);
  q.P_sq = detail::prefactor(omega0) * s * s * bandwidth_eff * solid_angle_eff;
  q.broadband_warning = bandwidth_eff / omega0 > kBroadbandThreshold;
  return q;
}

namespace detail {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> values;  // envelope at the nodes
};

inline void append_gl(Rule1D& r, double lo, double hi, int n, const std::function<double(double)>& measure,
                      const std::function<double(double)>& envelope) {
  const GaussLegendreRule gl = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (int i = 0; i < n; ++i) {
    const double t = mid + half * gl.nodes[static_cast<std::size_t>(i)];
    r.nodes.push_back(t);
    r.weights.push_back(half * gl.weights[static_cast<std::size_t>(i)] * measure(t));
    r.values.push_back(envelope(t));
  }
}

/// Polar-angle rule for the angular envelope, with the 2 pi sin(theta)
/// measure folded into the weights.
inline Rule1D angular_rule(const AngularEnvelope& env) {
  Rule1D r;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IsotropicEnvelope>) {
          r = {{0.0}, {4.0 * constants::pi}, {1.0}};
        } else if constexpr (std::is_same_v<T, TopHatCap>) {
          r = {{0.0}, {2.0 * constants::pi * (1.0 - std::cos(e.theta_max))}, {1.0}};
        } else if constexpr (std::is_same_v<T, ParaxialBeam>) {
          r = {{0.0}, {e.solid_angle}, {1.0}};
        } else {
          const auto measure = [](double t) { return 2.0 * constants::pi * std::sin(t); };
          const double s = e.sigma;
          const auto g = [s](double t) { return std::exp(-0.5 * (t / s) * (t / s)); };
          const double cut = std::min(constants::pi, 10.0 * s);
          append_gl(r, 0.0, cut, 200, measure, g);
          if (cut < constants::pi) append_gl(r, cut, constants::pi, 64, measure, g);
        }
      },
      env);
  return r;
}

inline Rule1D spectral_rule(const SpectralEnvelope& env) {
  Rule1D r;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DeltaBand>) {
          r = {{e.omega0}, {e.bandwidth}, {1.0}};
        } else {
          const double s = e.sigma;
          const double w0 = e.omega0;
          append_gl(r, w0 - kGaussianSpan * s, w0 + kGaussianSpan * s, 96, [](double) { return 1.0; },
                    [s, w0](double w) { return std::exp(-0.5 * ((w - w0) / s) * ((w - w0) / s)); });
        }
      },
      env);
  return r;
}

/// int d omega int do sinh^2(r g h) / sinh^2(r) and the same over omega with
/// g = 1. For r -> 0 these tend to the integrals of g^2 h^2 and h^2.
inline std::pair<double, double> photon_integrals(double r0, const Rule1D& ang, const Rule1D& spec) {
  const double r = std::max(r0, 1e-6);
  const double norm = std::sinh(r) * std::sinh(r);
  CompensatedSum joint, band;
  for (std::size_t s = 0; s < spec.nodes.size(); ++s) {
    const double h = spec.values[s];
    const double sb = std::sinh(r * h);
    band.add(spec.weights[s] * sb * sb / norm);
    for (std::size_t a = 0; a < ang.nodes.size(); ++a) {
      const double sj = std::sinh(r * h * ang.values[a]);
      joint.add(spec.weights[s] * ang.weights[a] * sj * sj / norm);
    }
  }
  return {joint.value(), band.value()};
}

}  // namespace detail

/// P_sq of a squeezing profile. The effective widths weight the envelopes by
/// photon number,
///   d_omega = int sinh^2(r0 h) d omega / sinh^2 r0,
///   d_o     = int int sinh^2(r0 g h) / (sinh^2 r0 d_omega),
/// so that sigma_pr(omega0) P_sq is the exact force whenever sigma_pr k^3 is
/// flat over the band and the squeezing is paraxial. For indicator-shaped
/// envelopes (delta band, top hat, paraxial, isotropic) these are the plain
/// envelope integrals.
inline QuantumPressure quantum_pressure(const SqueezingProfile& profile) {
  profile.validate();
  const auto [joint, band] =
      detail::photon_integrals(profile.r0, detail::angular_rule(profile.angular), detail::spectral_rule(profile.spectral));
  return quantum_pressure(profile.center_frequency(), profile.r0, band, joint / band);
}

inline Vec3 narrowband_force_estimate(double sigma_pr, const QuantumPressure& q, const Vec3& axis) {
  return sigma_pr * q.P_sq * normalized_axis(axis);
}

// ---------------------------------------------------------------------------
// Total force

struct ForceGrids {
  int n_theta = 64;
  int n_phi = 128;
  double angular_tolerance = 1e-8;
  int max_doublings = 3;
  int spectral_nodes = 48;  // Gauss-Legendre nodes for Gaussian bands
  TruncationPolicy truncation;
  FunctionalOptions functional;
};

struct ForceDiagnostics {
  FunctionalMode mode = FunctionalMode::SphereReduced;
  std::string truncation;
  int n_trunc_at_omega0 = 0;
  bool truncation_warning = false;
  bool material_extrapolated = false;
  std::string drive_grid;
  int drive_n_theta = 0;
  int drive_n_phi = 0;
  double drive_grid_change = 0.0;  // self-convergence estimate of the drive grid
  std::string recoil_grid;
  std::size_t spectral_nodes = 0;
  double drive_scale = 0.0;
  double recoil_scale = 0.0;
  double recoil_residual = 0.0;   // |recoil| / recoil_scale
  double band_variation = 0.0;    // max |sigma_pr k^3 - (sigma_pr k^3)(omega0)| / (sigma_pr k^3)(omega0)
  double projection_defect = 0.0; // |<n>_w - n0|
  double narrowband_bound = 0.0;  // bound on |F - estimate| / |F|
  double narrowband_deviation = 0.0;
  bool broadband_warning = false;
};

struct ForceResult {
  Vec3 total = Vec3::Zero();
  Vec3 drive = Vec3::Zero();
  Vec3 recoil = Vec3::Zero();
  Vec3 estimate = Vec3::Zero();  // sigma_pr(omega0) P_sq n0
  double omega0 = 0.0;
  double sigma_pr_at_omega0 = 0.0;
  double P_sq = 0.0;
  QuantumPressure pressure;
  ForceDiagnostics diagnostics;
};

/// Direction grid adapted to the angular envelope: a single node for the
/// paraxial beam, a grid split at the cap edge for caps.
inline DirectionGrid drive_direction_grid(const SqueezingProfile& profile, int n_theta, int n_phi) {
  const Vec3 axis = normalized_axis(profile.axis);
  return std::visit(
      [&](const auto& e) -> DirectionGrid {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ParaxialBeam>) {
          return single_direction_grid(axis, e.solid_angle);
        } else if constexpr (std::is_same_v<T, TopHatCap>) {
          if (e.theta_max >= constants::pi) return build_axis_grid(axis, n_theta, n_phi);
          return build_axis_grid(axis, n_theta, n_phi, e.theta_max);
        } else if constexpr (std::is_same_v<T, GaussianCap>) {
          const double split = kGaussianSpan * e.sigma;
          if (split >= 0.9 * constants::pi) return build_axis_grid(axis, n_theta, n_phi);
          return build_axis_grid(axis, n_theta, n_phi, split);
        } else {
          return build_axis_grid(axis, n_theta, n_phi);
        }
      },
      profile.angular);
}

inline SpectralGrid drive_spectral_grid(const SqueezingProfile& profile, int nodes = 48) {
  return std::visit(
      [&](const auto& e) -> SpectralGrid {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DeltaBand>) {
          return delta_spectral_grid(e.omega0, e.bandwidth);
        } else {
          return build_spectral_grid(e.omega0 - kGaussianSpan * e.sigma, e.omega0 + kGaussianSpan * e.sigma, nodes);
        }
      },
      profile.spectral);
}

namespace detail {

struct WeightMoments {
  Vec3 moment = Vec3::Zero();
  double total = 0.0;
};

inline WeightMoments weight_moments(const WeightFunction& w, const SpectralGrid& sg, const DirectionGrid& dg) {
  VectorSum m;
  CompensatedSum t;
  for (std::size_t s = 0; s < sg.size(); ++s) {
    for (std::size_t i = 0; i < dg.size(); ++i) {
      const double v = sg.weights[s] * dg.weights[i] * checked_weight(w, sg.nodes[s], dg.nodes[i]);
      m.add(v * dg.nodes[i]);
      t.add(v);
    }
  }
  return {m.value(), t.value()};
}

}  // namespace detail

/// F = F[sinh^2 r] - F[n(beta)]. The drive grid starts at (n_theta, n_phi) and
/// is doubled until the weight moment int int w n agrees with its doubled
/// counterpart to `angular_tolerance` relative to int int w. The recoil is
/// evaluated, not assumed zero, on a full-sphere grid over the drive band.
inline ForceResult total_force(const SphereTarget& target, const SqueezingProfile& profile,
                               const ThermalState& thermal, const ForceGrids& grids = {}) {
  profile.validate();
  thermal.validate();
  const Vec3 axis = normalized_axis(profile.axis);
  const SpectralGrid sgrid = drive_spectral_grid(profile, grids.spectral_nodes);
  const double omega0 = profile.center_frequency();

  // Mie solutions at the band nodes and at omega0, computed once.
  std::vector<double> omegas = sgrid.nodes;
  omegas.push_back(omega0);
  const auto sols = parallel_map(omegas.size(), grids.functional.threads, [&](std::size_t i) {
    const double k = omegas[i] / constants::speed_of_light;
    return mie_coefficients(target, omegas[i], truncation_order(k * target.radius, grids.truncation));
  });
  std::map<double, const MieSolution*> cache;
  for (std::size_t i = 0; i < omegas.size(); ++i) cache.emplace(omegas[i], &sols[i]);
  const SolutionProvider provider = [&](double omega) -> MieSolution {
    if (auto it = cache.find(omega); it != cache.end()) return *it->second;
    const double k = omega / constants::speed_of_light;
    return mie_coefficients(target, omega, truncation_order(k * target.radius, grids.truncation));
  };

  const WeightFunction drive_w = [&](double omega, const Vec3& n) { return profile.photon_number(omega, n); };
  const WeightFunction recoil_w = [&](double omega, const Vec3&) { return thermal.occupation(omega); };

  // Drive grid selection by self-convergence of the weight moment.
  int nt = grids.n_theta;
  int np = grids.n_phi;
  DirectionGrid dgrid = drive_direction_grid(profile, nt, np);
  double change = 0.0;
  if (dgrid.size() > 1) {
    bool converged = false;
    for (int level = 0; level <= grids.max_doublings; ++level) {
      const auto coarse = detail::weight_moments(drive_w, sgrid, dgrid);
      const auto fine = detail::weight_moments(drive_w, sgrid, drive_direction_grid(profile, 2 * nt, 2 * np));
      const double denom = std::max(fine.moment.norm(), fine.total);
      change = denom > 0.0 ? std::max((fine.moment - coarse.moment).norm(), std::abs(fine.total - coarse.total)) / denom
                           : 0.0;
      if (change <= grids.angular_tolerance) {
        converged = true;
        break;
      }
      if (level == grids.max_doublings) break;
      nt *= 2;
      np *= 2;
      dgrid = drive_direction_grid(profile, nt, np);
    }
    if (!converged) throw AccuracyError("drive direction grid did not converge", change);
  }
  const DirectionGrid rgrid = build_axis_grid(axis, grids.n_theta, grids.n_phi);

  const FunctionalValue drive = radiation_pressure_functional(drive_w, provider, sgrid, dgrid, grids.functional);
  const FunctionalValue recoil = radiation_pressure_functional(recoil_w, provider, sgrid, rgrid, grids.functional);

  ForceResult r;
  r.drive = drive.force;
  r.recoil = recoil.force;
  r.total = r.drive - r.recoil;
  r.omega0 = omega0;
  const MieSolution& sol0 = sols.back();
  const CrossSections cs0 = cross_sections(sol0);
  r.sigma_pr_at_omega0 = cs0.sigma_pr;
  r.pressure = quantum_pressure(profile);
  r.P_sq = r.pressure.P_sq;
  r.estimate = narrowband_force_estimate(r.sigma_pr_at_omega0, r.pressure, axis);

  ForceDiagnostics& d = r.diagnostics;
  d.mode = grids.functional.mode;
  d.truncation = grids.truncation.to_string();
  d.n_trunc_at_omega0 = sol0.n_trunc;
  d.truncation_warning = cs0.truncation_warning;
  d.material_extrapolated = sol0.material_extrapolated;
  d.drive_grid = dgrid.size() == 1 ? "single direction" : dgrid.describe();
  d.drive_n_theta = dgrid.n_theta;
  d.drive_n_phi = dgrid.n_phi;
  d.drive_grid_change = change;
  d.recoil_grid = rgrid.describe();
  d.spectral_nodes = sgrid.size();
  d.drive_scale = drive.scale;
  d.recoil_scale = recoil.scale;
  d.recoil_residual = recoil.scale > 0.0 ? r.recoil.norm() / recoil.scale : 0.0;
  d.broadband_warning = r.pressure.broadband_warning;

  const double ref = cs0.sigma_pr * std::pow(sol0.k, 3);
  for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
    d.truncation_warning = d.truncation_warning || cross_sections(sols[i]).truncation_warning;
    d.material_extrapolated = d.material_extrapolated || sols[i].material_extrapolated;
    if (ref > 0.0) {
      const double v = cross_sections(sols[i]).sigma_pr * std::pow(sols[i].k, 3);
      d.band_variation = std::max(d.band_variation, std::abs(v - ref) / ref);
    }
  }
  const auto mom = detail::weight_moments(drive_w, sgrid, dgrid);
  if (mom.total > 0.0) d.projection_defect = (mom.moment / mom.total - axis).norm();
  const double e = d.band_variation + d.projection_defect;
  d.narrowband_bound = e < 1.0 ? e / (1.0 - e) + grids.angular_tolerance : std::numeric_limits<double>::infinity();
  const double fn = r.total.norm();
  d.narrowband_deviation = fn > 0.0 ? (r.total - r.estimate).norm() / fn : 0.0;
  return r;
}

}  // namespace mieforce
