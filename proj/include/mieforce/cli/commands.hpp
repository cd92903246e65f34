#pragma once

// The four CLI commands. Each returns its table or report; the driver writes
// files and maps errors to exit codes.

#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mieforce/cli/config.hpp"
#include "mieforce/cli/csv.hpp"
#include "mieforce/dyadic.hpp"
#include "mieforce/force.hpp"
#include "mieforce/mie.hpp"
#include "mieforce/parallel.hpp"
#include "mieforce/special_functions.hpp"

namespace mieforce::cli {

inline std::vector<std::string> provenance(const std::string& command, const RunConfig& cfg) {
  std::vector<std::string> c;
  c.push_back("mieforce " + command);
  for (const auto& [k, v] : cfg.echo) c.push_back(k + " = " + v);
  c.push_back("derived.omega0_rad_s = " + format_number(cfg.omega0));
  c.push_back("derived.wavelength_m = " + format_number(2.0 * constants::pi * constants::speed_of_light / cfg.omega0));
  c.push_back("derived.truncation = " + cfg.truncation.to_string());
  if (cfg.has_squeezing() && cfg.bandwidth_unit) {
    c.push_back("derived.r0 = " + format_number(cfg.r0));
    c.push_back("derived.bandwidth_rad_s = " + format_number(cfg.bandwidth()));
  }
  return c;
}

namespace detail {

inline int order_for(const RunConfig& cfg, double radius) {
  const double k = cfg.omega0 / constants::speed_of_light;
  return truncation_order(k * radius, cfg.truncation);
}

struct Warnings {
  int truncation = 0;
  int extrapolated = 0;
  int broadband = 0;

  void append_to(std::vector<std::string>& comments) const {
    if (truncation) comments.push_back("warning: truncation tail above tolerance at " + std::to_string(truncation) + " point(s)");
    if (extrapolated) comments.push_back("warning: permittivity extrapolated (end value held) at " + std::to_string(extrapolated) + " point(s)");
    if (broadband) comments.push_back("warning: bandwidth exceeds 10% of omega0; narrowband estimate unreliable");
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------

inline Table cmd_cross_sections(const RunConfig& cfg) {
  const auto radii = cfg.radii();
  const int threads = resolve_threads(cfg);
  struct Row {
    CrossSections cs;
    double x;
    bool extrapolated;
  };
  const auto rows = parallel_map(radii.size(), threads, [&](std::size_t i) {
    const SphereTarget t{radii[i], cfg.material};
    const MieSolution sol = mie_coefficients(t, cfg.omega0, detail::order_for(cfg, radii[i]));
    return Row{cross_sections(sol), sol.size_parameter, sol.material_extrapolated};
  });

  Table table;
  table.header = {"a[m]", "x", "sigma_ext[m^2]", "sigma_sca[m^2]", "sigma_abs[m^2]", "sigma_asym[m^2]", "sigma_pr[m^2]"};
  detail::Warnings warn;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    table.rows.push_back({radii[i], r.x, r.cs.sigma_ext, r.cs.sigma_sca, r.cs.sigma_abs, r.cs.sigma_asym, r.cs.sigma_pr});
    warn.truncation += r.cs.truncation_warning;
    warn.extrapolated += r.extrapolated;
  }
  table.comments = provenance("cross-sections", cfg);
  warn.append_to(table.comments);
  return table;
}

// ---------------------------------------------------------------------------

inline std::vector<ForceResult> sweep_forces(const RunConfig& cfg) {
  if (!cfg.has_squeezing()) throw ConfigError("force needs a [squeezing] section with a spectral envelope");
  const auto radii = cfg.radii();
  const int threads = resolve_threads(cfg);
  const SqueezingProfile profile = cfg.profile();
  const ThermalState thermal{cfg.temperature};
  // One level of parallelism: across radii for sweeps, inside the engine for
  // a single point. Both reduce in a fixed order.
  const int inner = radii.size() > 1 ? 1 : threads;
  const int outer = radii.size() > 1 ? threads : 1;
  return parallel_map(radii.size(), outer, [&](std::size_t i) {
    return total_force(SphereTarget{radii[i], cfg.material}, profile, thermal, cfg.grids(inner));
  });
}

inline Table cmd_force(const RunConfig& cfg) {
  const auto radii = cfg.radii();
  const auto results = sweep_forces(cfg);
  Table table;
  table.header = {"a[m]", "x",
                  "F_total_x[N]", "F_total_y[N]", "F_total_z[N]",
                  "F_drive_x[N]", "F_drive_y[N]", "F_drive_z[N]",
                  "F_recoil_x[N]", "F_recoil_y[N]", "F_recoil_z[N]",
                  "F_estimate_x[N]", "F_estimate_y[N]", "F_estimate_z[N]",
                  "sigma_pr_at_omega0[m^2]", "P_sq[N/m^2]",
                  "recoil_residual", "drive_grid_change", "narrowband_deviation", "narrowband_bound"};
  detail::Warnings warn;
  const double k0 = cfg.omega0 / constants::speed_of_light;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const ForceResult& r = results[i];
    const auto& d = r.diagnostics;
    table.rows.push_back({radii[i], k0 * radii[i],
                          r.total.x(), r.total.y(), r.total.z(),
                          r.drive.x(), r.drive.y(), r.drive.z(),
                          r.recoil.x(), r.recoil.y(), r.recoil.z(),
                          r.estimate.x(), r.estimate.y(), r.estimate.z(),
                          r.sigma_pr_at_omega0, r.P_sq,
                          d.recoil_residual, d.drive_grid_change, d.narrowband_deviation, d.narrowband_bound});
    warn.truncation += d.truncation_warning;
    warn.extrapolated += d.material_extrapolated;
    warn.broadband = warn.broadband || d.broadband_warning;
  }
  table.comments = provenance("force", cfg);
  if (!results.empty()) {
    const auto& d = results.front().diagnostics;
    table.comments.push_back("derived.mode = " + to_string(d.mode));
    table.comments.push_back("derived.drive_grid = " + d.drive_grid);
    table.comments.push_back("derived.recoil_grid = " + d.recoil_grid);
    table.comments.push_back("derived.spectral_nodes = " + std::to_string(d.spectral_nodes));
    table.comments.push_back("derived.bandwidth_eff_rad_s = " + format_number(results.front().pressure.bandwidth_eff));
    table.comments.push_back("derived.solid_angle_eff_sr = " + format_number(results.front().pressure.solid_angle_eff));
  }
  warn.append_to(table.comments);
  return table;
}

// ---------------------------------------------------------------------------

/// fig1 preset: eps = 12.11 + 0.1i, 1550 nm, N = 200, 600 radii on
/// [0.2, 10] um, 6 dB paraxial squeezing over 1 sr and 2.5 THz.
inline RunConfig fig1_config() {
  const std::string text = R"(
[target]
radius_min = "0.2 um"
radius_max = "10 um"
count = 600
spacing = "linear"

[material]
epsilon = [12.11, 0.1]

[source]
wavelength = "1550 nm"

[squeezing]
r0 = 0.69
axis = [0.0, 0.0, 1.0]
angular = "paraxial"
solid_angle = "1 sr"
spectral = "delta"
bandwidth = "2.5 THz"
bandwidth_unit = "hz"

[thermal]
temperature = "300 K"

[numerics]
truncation = "fixed:200"
)";
  return parse_config(text, "fig1-preset");
}

inline Table cmd_fig1(const RunConfig& cfg) {
  const auto radii = cfg.radii();
  const auto forces = sweep_forces(cfg);
  const int threads = resolve_threads(cfg);
  const auto sections = parallel_map(radii.size(), threads, [&](std::size_t i) {
    return cross_sections(mie_coefficients(SphereTarget{radii[i], cfg.material}, cfg.omega0, detail::order_for(cfg, radii[i])));
  });
  const Vec3 axis = normalized_axis(cfg.axis);
  const double k0 = cfg.omega0 / constants::speed_of_light;
  Table table;
  table.header = {"a[m]", "x", "sigma_ext[m^2]", "sigma_sca[m^2]", "sigma_abs[m^2]", "sigma_asym[m^2]",
                  "sigma_pr[m^2]", "Q_pr", "F_axial[N]", "F_estimate_axial[N]", "P_sq[N/m^2]"};
  detail::Warnings warn;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const auto& cs = sections[i];
    const auto& f = forces[i];
    table.rows.push_back({radii[i], k0 * radii[i], cs.sigma_ext, cs.sigma_sca, cs.sigma_abs, cs.sigma_asym, cs.sigma_pr,
                          cs.sigma_pr / (constants::pi * radii[i] * radii[i]), f.total.dot(axis), f.estimate.dot(axis),
                          f.P_sq});
    warn.truncation += cs.truncation_warning;
  }
  table.comments = provenance("fig1", cfg);
  warn.append_to(table.comments);
  return table;
}

// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  double radius = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CertifyReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> comments;

  bool passed() const {
    for (const auto& c : checks) if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do {
    v = {g(rng), g(rng), g(rng)};
  } while (v.norm() < 1e-8);
  return v.normalized();
}

inline CheckResult make_check(std::string name, double radius, double residual, double tol) {
  return {std::move(name), radius, residual, tol, std::isfinite(residual) && residual <= tol};
}

}  // namespace detail

/// Fixed seed for the random direction pairs.
inline constexpr std::uint64_t kCertifySeed = 0x5eed2024;

inline std::vector<CheckResult> certify_point(const RunConfig& cfg, double radius, int threads) {
  const SphereTarget target{radius, cfg.material};
  const MieSolution sol = mie_coefficients(target, cfg.omega0, detail::order_for(cfg, radius));
  const double x = sol.size_parameter;
  if (x > cfg.dyadic_max_size_parameter)
    throw ConfigError("certify runs the dyadic checks and needs x <= " + std::to_string(cfg.dyadic_max_size_parameter) +
                      " (x = " + std::to_string(x) + ")");
  const MieSolution ref = mie_coefficients(target, cfg.omega0, truncation_order(x, TruncationPolicy::automatic()));
  const CrossSections cs = cross_sections(sol);
  const CrossSections cs_ref = cross_sections(ref);
  const bool lossless = sol.permittivity.imag() == 0.0;
  std::vector<CheckResult> out;

  {  // psi xi' - psi' xi = i
    const RiccatiTable t = riccati_xi(sol.n_trunc, x);
    double r = 0.0;
    for (int n = 0; n <= std::min(sol.n_trunc, t.xi_finite_order); ++n) {
      const cdouble w = t.psi[n] * t.xi_prime[n] - t.psi_prime[n] * t.xi[n];
      r = std::max(r, std::abs(w - cdouble(0.0, 1.0)));
    }
    out.push_back(detail::make_check("wronskian", radius, r, 1e-10));
  }
  {  // Re c >= |c|^2, with equality when lossless
    double r = 0.0;
    for (int n = 1; n <= sol.n_trunc; ++n) {
      for (const cdouble c : {sol.a_n(n), sol.b_n(n)}) {
        const double d = c.real() - std::norm(c);
        r = std::max(r, lossless ? std::abs(d) : std::max(0.0, -d));
      }
    }
    out.push_back(detail::make_check("unitarity", radius, r, 1e-12));
  }
  out.push_back(detail::make_check("absorption_nonnegative", radius,
                                   cs.sigma_ext > 0.0 ? std::max(0.0, -cs.sigma_abs / cs.sigma_ext) : 0.0, 1e-12));

  const DirectionGrid grid = exact_outgoing_grid(sol.n_trunc, cfg.axis);
  const TraceCrossSections tr = trace_cross_sections(sol, grid, cfg.axis);
  {
    double r = cs.sigma_ext > 0.0 ? std::abs(tr.sections.sigma_ext - cs.sigma_ext) / cs.sigma_ext : 0.0;
    if (lossless && cs.sigma_ext > 0.0) r = std::max(r, std::abs(cs.sigma_ext - cs.sigma_sca) / cs.sigma_ext);
    out.push_back(detail::make_check("optical_theorem", radius, r, 1e-10));
  }

  const DyadicExpansion e(sol, sol.n_trunc);
  {
    std::mt19937_64 rng(kCertifySeed);
    double recip = 0.0, transv = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 m = detail::random_direction(rng);
      const Vec3 n = detail::random_direction(rng);
      const Mat3c s = e(m, n);
      const double norm = s.norm();
      if (norm == 0.0) continue;
      recip = std::max(recip, (s.transpose() - e(-n, -m)).norm() / norm);
      const double left = (m.cast<cdouble>().transpose() * s).norm();
      const double right = (s * n.cast<cdouble>()).norm();
      transv = std::max({transv, left / norm, right / norm});
    }
    out.push_back(detail::make_check("reciprocity", radius, recip, 1e-10));
    out.push_back(detail::make_check("transversality", radius, transv, 1e-10));
  }
  {  // dyadic traces at the configured order against the converged series
    const double s = cs_ref.sigma_sca;
    double r = 0.0;
    if (s > 0.0) {
      r = std::max({std::abs(tr.sections.sigma_ext - cs_ref.sigma_ext) / cs_ref.sigma_ext,
                    std::abs(tr.sections.sigma_sca - cs_ref.sigma_sca) / s,
                    std::abs(tr.sections.sigma_asym - cs_ref.sigma_asym) / s});
    }
    out.push_back(detail::make_check("trace_mapping", radius, r, 1e-6));
  }

  const SpectralGrid sg = delta_spectral_grid(cfg.omega0, 1.0);
  const SolutionProvider provider = [&](double) { return sol; };
  FunctionalOptions opt;
  opt.threads = threads;
  opt.dyadic_max_size_parameter = cfg.dyadic_max_size_parameter;
  {
    const DirectionGrid full = build_axis_grid(cfg.axis, cfg.n_theta, cfg.n_phi);
    const WeightFunction one = [](double, const Vec3&) { return 1.0; };
    double r = 0.0;
    for (auto mode : {FunctionalMode::SphereReduced, FunctionalMode::Dyadic}) {
      opt.mode = mode;
      const FunctionalValue v = radiation_pressure_functional(one, provider, sg, full, opt);
      if (v.scale > 0.0) r = std::max(r, v.force.norm() / v.scale);
    }
    out.push_back(detail::make_check("isotropic_null", radius, r, 1e-10));
  }
  {
    SqueezingProfile p;
    p.r0 = cfg.r0 > 0.0 ? cfg.r0 : 0.69;
    p.axis = cfg.axis;
    p.angular = GaussianCap{0.2};
    p.spectral = DeltaBand{cfg.omega0, 1.0};
    const DirectionGrid cap = drive_direction_grid(p, cfg.n_theta, cfg.n_phi);
    const WeightFunction w = [&](double, const Vec3& n) { return p.photon_number(cfg.omega0, n); };
    opt.mode = FunctionalMode::SphereReduced;
    const Vec3 fs = radiation_pressure_functional(w, provider, sg, cap, opt).force;
    opt.mode = FunctionalMode::Dyadic;
    const Vec3 fd = radiation_pressure_functional(w, provider, sg, cap, opt).force;
    const double r = fs.norm() > 0.0 ? (fd - fs).norm() / fs.norm() : (fd - fs).norm();
    out.push_back(detail::make_check("mode_equivalence", radius, r, 1e-6));
  }
  return out;
}

inline CertifyReport cmd_certify(const RunConfig& cfg) {
  CertifyReport rep;
  const int threads = resolve_threads(cfg);
  const double k0 = cfg.omega0 / constants::speed_of_light;
  for (double a : cfg.radii()) {
    if (k0 * a > cfg.dyadic_max_size_parameter)
      throw ConfigError("certify runs the dyadic checks and needs x <= " + format_number(cfg.dyadic_max_size_parameter) +
                        " (x = " + format_number(k0 * a) + " at a = " + format_number(a) + " m)");
  }
  for (double a : cfg.radii()) {
    auto c = certify_point(cfg, a, threads);
    rep.checks.insert(rep.checks.end(), c.begin(), c.end());
  }
  rep.comments = provenance("certify", cfg);
  return rep;
}

inline void print_report(std::ostream& os, const CertifyReport& rep) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-14s %-12s %-10s %s", "check", "radius[m]", "residual", "tolerance", "status");
  os << buf << '\n';
  for (const auto& c : rep.checks) {
    std::snprintf(buf, sizeof buf, "%-24s %-14.6e %-12.3e %-10.1e %s", c.name.c_str(), c.radius, c.residual, c.tolerance,
                  c.passed ? "PASS" : "FAIL");
    os << buf << '\n';
  }
  int failed = 0;
  for (const auto& c : rep.checks) {
    if (c.passed) continue;
    ++failed;
    std::snprintf(buf, sizeof buf, "FAILED: %s radius=%.6e residual=%.3e tolerance=%.1e", c.name.c_str(), c.radius,
                  c.residual, c.tolerance);
    os << buf << '\n';
  }
  os << (failed ? std::to_string(failed) + " check(s) failed" : std::string("all checks passed")) << '\n';
}

inline void write_report_csv(std::ostream& os, const CertifyReport& rep) {
  for (const auto& c : rep.comments) os << "# " << c << "\r\n";
  os << "check,a[m],residual,tolerance,passed\r\n";
  for (const auto& c : rep.checks) {
    os << quote_field(c.name) << ',' << format_number(c.radius) << ',' << format_number(c.residual) << ','
       << format_number(c.tolerance) << ',' << (c.passed ? 1 : 0) << "\r\n";
  }
}

}  // namespace mieforce::cli
