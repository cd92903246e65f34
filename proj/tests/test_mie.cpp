#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "mieforce/mie.hpp"
#include "oracles/riccati_oracle_values.hpp"

using namespace mieforce;

namespace {

constexpr double kLambda = 1550e-9;
const double kOmega = 2.0 * constants::pi * constants::speed_of_light / kLambda;
const double kK = kOmega / constants::speed_of_light;

SphereTarget sphere_with_x(double x, cdouble eps) { return {x / kK, MaterialSpec::constant(eps)}; }

MieSolution solve(double x, cdouble eps, TruncationPolicy p = TruncationPolicy::automatic()) {
  return mie_coefficients(sphere_with_x(x, eps), kOmega, truncation_order(x, p));
}

double rel(cdouble a, cdouble b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(MieCoefficients, MatchExtendedPrecisionOracle) {
  for (const auto& e : oracle::kMie) {
    // Build omega so that k a reproduces the oracle's x exactly for a = x / k.
    const SphereTarget t{e.x / kK, MaterialSpec::constant(e.eps)};
    const MieSolution s = mie_coefficients(t, kOmega, e.n);
    EXPECT_LT(rel(s.a_n(e.n), e.a), 1e-9) << "n = " << e.n << " x = " << e.x;
    EXPECT_LT(rel(s.b_n(e.n), e.b), 1e-9) << "n = " << e.n << " x = " << e.x;
  }
}

TEST(MieCoefficients, QuotientFormAgreesWithLogDerivativeForm) {
  for (double x : {0.3, 2.0, 12.0, 40.5}) {
    const auto t = sphere_with_x(x, {12.11, 0.1});
    const int n = truncation_order(x, TruncationPolicy::automatic());
    const MieSolution a = mie_coefficients(t, kOmega, n);
    const MieSolution b = mie_coefficients_direct(t, kOmega, n);
    for (int k = 1; k <= n; ++k) {
      const double scale = std::max(std::abs(a.a_n(k)), 1e-300);
      EXPECT_LT(std::abs(a.a_n(k) - b.a_n(k)) / scale, 1e-9) << x << " " << k;
    }
    EXPECT_NEAR(cross_sections(a).sigma_pr, cross_sections(b).sigma_pr, 1e-12 * cross_sections(a).sigma_pr);
  }
}

TEST(CrossSections, RayleighLimit) {
  for (cdouble eps : {cdouble(2.25, 0.0), cdouble(12.11, 0.1), cdouble(-2.0, 1.5)}) {
    for (double x : {1e-3, 5e-3, 1e-2}) {
      const MieSolution s = solve(x, eps);
      const CrossSections cs = cross_sections(s);
      const double a = s.radius;
      const cdouble alpha = (eps - 1.0) / (eps + 2.0);
      const double sca = 8.0 * constants::pi / 3.0 * std::pow(kK, 4) * std::pow(a, 6) * std::norm(alpha);
      EXPECT_LT(std::abs(cs.sigma_sca - sca) / sca, 1e-3) << "x = " << x;
      if (eps.imag() > 0.0) {
        const double abs = 4.0 * constants::pi * kK * a * a * a * alpha.imag();
        EXPECT_LT(std::abs(cs.sigma_abs - abs) / abs, 1e-3) << "x = " << x;
      }
    }
  }
}

TEST(CrossSections, LosslessExtinctionEqualsScattering) {
  for (double eps : {2.25, 12.11}) {
    for (double x : {0.5, 1.0, 2.0, 5.0, 40.5}) {
      const CrossSections cs = cross_sections(solve(x, {eps, 0.0}));
      EXPECT_LT(std::abs(cs.sigma_ext - cs.sigma_sca) / cs.sigma_ext, 1e-10) << eps << " " << x;
    }
  }
}

TEST(CrossSections, AbsorbingSphereIsPassive) {
  for (double x : {0.1, 1.0, 7.0, 40.5}) {
    const MieSolution s = solve(x, {12.11, 0.1});
    for (int n = 1; n <= s.n_trunc; ++n) {
      EXPECT_GE(s.a_n(n).real() - std::norm(s.a_n(n)), -1e-14);
      EXPECT_GE(s.b_n(n).real() - std::norm(s.b_n(n)), -1e-14);
    }
    const CrossSections cs = cross_sections(s);
    EXPECT_GT(cs.sigma_abs, 0.0);
    EXPECT_GT(cs.sigma_pr, 0.0);
  }
}

TEST(CrossSections, IndexMatchedSphereIsInvisible) {
  const CrossSections cs = cross_sections(solve(3.0, {1.0, 0.0}));
  EXPECT_EQ(cs.sigma_ext, 0.0);
  EXPECT_EQ(cs.sigma_sca, 0.0);
  EXPECT_EQ(cs.sigma_abs, 0.0);
  EXPECT_EQ(cs.sigma_asym, 0.0);
  EXPECT_EQ(cs.sigma_pr, 0.0);
}

TEST(CrossSections, StronglyAbsorbingLargeSphereStaysFinite) {
  // |Im(m x)| ~ 750: beyond the direct form's limit, fine through D_n.
  const MieSolution s = solve(600.0, {1.0, 4.0});
  const CrossSections cs = cross_sections(s);
  ASSERT_TRUE(std::isfinite(cs.sigma_ext));
  const double geometric = constants::pi * s.radius * s.radius;
  EXPECT_NEAR(cs.sigma_ext / geometric, 2.0, 0.05);
  EXPECT_THROW(mie_coefficients_direct(sphere_with_x(600.0, {1.0, 4.0}), kOmega, 10), RangeError);
}

TEST(CrossSections, Fig1PresetEndpointRegression) {
  // Implementation regression value (fixed N = 200).
  const SphereTarget t{10e-6, MaterialSpec::constant({12.11, 0.1})};
  const CrossSections cs = cross_sections(mie_coefficients(t, kOmega, 200));
  EXPECT_NEAR(cs.sigma_pr, 3.3494290868549696e-10, 1e-8 * 3.35e-10);
  EXPECT_GE(cs.sigma_pr, 320e-12);
  EXPECT_FALSE(cs.truncation_warning);
}

TEST(CrossSections, TruncationWarningOnUnderTruncation) {
  EXPECT_TRUE(cross_sections(solve(5.0, {2.25, 0.0}, TruncationPolicy::fixed(3))).truncation_warning);
  EXPECT_FALSE(cross_sections(solve(5.0, {2.25, 0.0})).truncation_warning);
}

TEST(CrossSections, HighTruncationOnSmallSphereIsHarmless) {
  const CrossSections a = cross_sections(solve(0.8, {12.11, 0.1}, TruncationPolicy::fixed(200)));
  const CrossSections b = cross_sections(solve(0.8, {12.11, 0.1}));
  EXPECT_NEAR(a.sigma_pr, b.sigma_pr, 1e-13 * b.sigma_pr);
}

TEST(Truncation, WiscombeOrderAndParsing) {
  EXPECT_EQ(truncation_order(1.0, TruncationPolicy::automatic()), 7);
  EXPECT_EQ(truncation_order(40.536679401158622, TruncationPolicy::automatic()), 57);
  EXPECT_EQ(truncation_order(40.5, TruncationPolicy::fixed(200)), 200);
  EXPECT_EQ(TruncationPolicy::parse("fixed:12").fixed_order, 12);
  EXPECT_EQ(TruncationPolicy::parse("auto").kind, TruncationPolicy::Kind::Auto);
  EXPECT_EQ(TruncationPolicy::parse("fixed:7").to_string(), "fixed:7");
  EXPECT_THROW(TruncationPolicy::parse("fixed:"), ConfigError);
  EXPECT_THROW(TruncationPolicy::parse("fixed:3x"), ConfigError);
  EXPECT_THROW(TruncationPolicy::parse("wiscombe"), ConfigError);
  EXPECT_THROW(TruncationPolicy::parse("fixed:0"), ConfigError);
  EXPECT_THROW(truncation_order(1.0, TruncationPolicy::fixed(0)), ConfigError);
  EXPECT_THROW(truncation_order(0.0, TruncationPolicy::automatic()), DomainError);
}

TEST(MieCoefficients, InvalidInputs) {
  const auto m = MaterialSpec::constant({2.0, 0.1});
  EXPECT_THROW(mie_coefficients({-1e-6, m}, kOmega, 5), DomainError);
  EXPECT_THROW(mie_coefficients({1e-6, m}, 0.0, 5), DomainError);
  EXPECT_THROW(mie_coefficients({1e-6, m}, kOmega, 0), ConfigError);
  EXPECT_THROW(MaterialSpec::constant({2.0, -0.1}), DomainError);
}

TEST(Material, TableInterpolatesAndFlagsExtrapolation) {
  const auto m = MaterialSpec::tabulated({{1e15, {10.0, 0.0}}, {2e15, {12.0, 1.0}}});
  const auto mid = m.at(1.5e15);
  EXPECT_DOUBLE_EQ(mid.eps.real(), 11.0);
  EXPECT_DOUBLE_EQ(mid.eps.imag(), 0.5);
  EXPECT_FALSE(mid.extrapolated);
  const auto below = m.at(0.5e15);
  EXPECT_TRUE(below.extrapolated);
  EXPECT_EQ(below.eps, cdouble(10.0, 0.0));
  EXPECT_THROW(MaterialSpec::tabulated({{2e15, {1.0, 0.0}}, {1e15, {1.0, 0.0}}}), ConfigError);
  EXPECT_THROW(MaterialSpec::tabulated({}), ConfigError);

  const SphereTarget t{1e-6, m};
  EXPECT_TRUE(mie_coefficients(t, 3e15, 5).material_extrapolated);
  EXPECT_FALSE(mie_coefficients(t, 1.2e15, 5).material_extrapolated);
}
