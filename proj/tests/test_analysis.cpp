#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pseudorot/analysis/gronwall.hpp"
#include "pseudorot/analysis/sobolev.hpp"

using namespace pseudorot;

namespace {

SobolevProbe gaussian_plane(double width) {
  SobolevProbe f;
  f.domain = SobolevDomain::plane;
  f.p = Profile1D::truncated_gaussian(0, width, 4);
  f.q = Profile1D::truncated_gaussian(0, width, 4);
  return f;
}

SobolevProbe cylinder_bump(long n, double center, double sigma) {
  SobolevProbe f;
  f.domain = SobolevDomain::cylinder;
  f.n = n;
  f.p = Profile1D::spline(0, 0.3);
  f.q = Profile1D::periodic_bump(center, sigma, static_cast<double>(n));
  return f;
}

}  // namespace

TEST(SobolevRatio, TruncatedGaussianBelowPlanarConstant) {
  for (double w : {0.1, 1.0, 5.0}) {
    auto r = sobolev_ratio(gaussian_plane(w));
    EXPECT_LT(r.gradient_ratio, kPlanarSobolevBound);
    EXPECT_GT(r.gradient_ratio, 0.5);
    EXPECT_LE(r.ratio, r.gradient_ratio);
    EXPECT_LT(r.refinement_change, 0.01);
  }
}

TEST(SobolevRatio, GradientFormIsDilationInvariantOnThePlane) {
  const double a = sobolev_ratio(gaussian_plane(0.2)).gradient_ratio;
  const double b = sobolev_ratio(gaussian_plane(3.0)).gradient_ratio;
  EXPECT_NEAR(a, b, 1e-3 * a);
}

TEST(SobolevRatio, ScaleInvariance) {
  std::mt19937_64 rng(11);
  for (auto d : {SobolevDomain::plane, SobolevDomain::half_plane, SobolevDomain::cylinder,
                 SobolevDomain::half_cylinder}) {
    const SobolevProbe f = random_probe(d, 4, rng);
    const double r = sobolev_ratio(f).ratio;
    for (double lambda : {-3.0, 1e-6, 0.5, 7e5}) {
      const double rl = sobolev_ratio(scaled(f, lambda)).ratio;
      EXPECT_NEAR(rl, r, 8 * std::numeric_limits<double>::epsilon() * r) << to_string(d) << " " << lambda;
    }
  }
}

TEST(SobolevRatio, TranslationInvarianceInT) {
  for (double c : {0.0, 0.37, 2.5, 3.999}) {
    auto base = cylinder_bump(4, 0.0, 0.2);
    auto moved = cylinder_bump(4, c, 0.2);
    base.q.modulation = moved.q.modulation = {{3, 0.2, 0.4}};
    EXPECT_EQ(sobolev_ratio(base).ratio, sobolev_ratio(moved).ratio);
  }
}

TEST(SobolevRatio, SameProfileAcrossPeriods) {
  const double r1 = sobolev_ratio(cylinder_bump(1, 0.3, 0.1)).ratio;
  const double r32 = sobolev_ratio(cylinder_bump(32, 0.3, 0.1)).ratio;
  EXPECT_NEAR(r1, r32, 0.1 * r32);
}

TEST(SobolevRatio, DegenerateProbeRejected) {
  auto f = cylinder_bump(2, 0, 0.2);
  f.amplitude = 0;
  EXPECT_THROW(sobolev_ratio(f), InvalidArgument);
}

TEST(SobolevRatio, ProbeShapeValidated) {
  auto f = cylinder_bump(2, 0, 0.2);
  f.n = 3;
  EXPECT_THROW(sobolev_ratio(f), InvalidArgument);
  SobolevProbe h = gaussian_plane(1);
  h.domain = SobolevDomain::half_plane;
  EXPECT_THROW(sobolev_ratio(h), InvalidArgument);
  h.p.cutoff = 0;
  EXPECT_NO_THROW(sobolev_ratio(h));
}

TEST(SobolevRatio, HalfPlaneCutAtPeakStaysBelowPlanarConstant) {
  SobolevProbe f = gaussian_plane(1);
  f.domain = SobolevDomain::half_plane;
  f.p.cutoff = 0;
  auto r = sobolev_ratio(f);
  EXPECT_LT(r.gradient_ratio, kPlanarSobolevBound);
  EXPECT_GT(r.gradient_ratio, sobolev_ratio(gaussian_plane(1)).gradient_ratio);
}

TEST(SobolevConstant, AllDomainsWithinBound) {
  for (auto d : {SobolevDomain::plane, SobolevDomain::half_plane, SobolevDomain::cylinder,
                 SobolevDomain::half_cylinder}) {
    auto t = estimate_sobolev_constant(d, {1, 4}, 20, 3);
    EXPECT_TRUE(t.all_within_bound) << to_string(d);
    EXPECT_LT(t.max_ratio, t.bound);
    EXPECT_DOUBLE_EQ(t.c, 1.5 * t.max_ratio);
    for (const auto& r : t.rows) {
      EXPECT_LE(r.min_ratio, r.mean_ratio);
      EXPECT_LE(r.mean_ratio, r.max_ratio);
      EXPECT_LT(r.max_refinement_change, 0.01);
    }
  }
}

TEST(SobolevConstant, PeriodIndependence) {
  auto t = estimate_sobolev_constant(SobolevDomain::half_cylinder, {1, 4, 16}, 24, 9);
  EXPECT_TRUE(t.period_independent) << t.spread;
}

TEST(SobolevConstant, DeterministicAcrossThreadCounts) {
  const std::size_t saved = thread_count();
  set_thread_count(1);
  const std::string a = estimate_sobolev_constant(SobolevDomain::cylinder, {2}, 6, 5).csv();
  set_thread_count(3);
  const std::string b = estimate_sobolev_constant(SobolevDomain::cylinder, {2}, 6, 5).csv();
  set_thread_count(saved);
  EXPECT_EQ(a, b);
}

TEST(SobolevConstant, ZeroTrialsRejected) {
  EXPECT_THROW(estimate_sobolev_constant(SobolevDomain::cylinder, {1}, 0, 1), InvalidArgument);
  EXPECT_THROW(estimate_sobolev_constant(SobolevDomain::cylinder, {0}, 1, 1), InvalidArgument);
}

TEST(CutoffChain, ReproducesTheReductionStepByStep) {
  std::mt19937_64 rng(17);
  for (long n : {1L, 3L}) {
    auto f = random_probe(SobolevDomain::cylinder, n, rng);
    auto c = cutoff_chain(f);
    EXPECT_LE(c.chi_slope, 2.0);
    EXPECT_TRUE(c.sup_preserved);
    EXPECT_LE(c.l2_factor, 3.0);
    EXPECT_LE(c.derivative_factor, 2.0);
    EXPECT_TRUE(c.planar_within_bound);
    EXPECT_TRUE(c.chain_holds);
    EXPECT_LE(c.cylinder.ratio, kCylinderSobolevBound);
  }
}

TEST(CutoffChain, CutoffFunctionShape) {
  EXPECT_EQ(cutoff_function(-1, 4).first, 0);
  EXPECT_EQ(cutoff_function(0, 4).first, 1);
  EXPECT_EQ(cutoff_function(4, 4).first, 1);
  EXPECT_EQ(cutoff_function(5, 4).first, 0);
  EXPECT_NEAR(cutoff_function(-0.5, 4).second, 1.875, 1e-12);
  EXPECT_NEAR(cutoff_function(4.5, 4).second, -1.875, 1e-12);
}

TEST(Gronwall, ExtremalExponentialHasZeroSlack) {
  const double a = 0.7, b = 1.3;
  auto g = GronwallInstance::sampled([&](double t) { return a * std::exp(b * t); }, a, b, 2.0, 2001);
  auto r = gronwall_check(g);
  EXPECT_EQ(r.verdict, GronwallVerdict::holds);
  EXPECT_EQ(r.min_slack, 0.0);
}

TEST(Gronwall, ConstantIsStrict) {
  auto g = GronwallInstance::sampled([](double) { return 2.0; }, 2.0, 0.5, 3.0, 301);
  auto r = gronwall_check(g);
  EXPECT_EQ(r.verdict, GronwallVerdict::holds);
  EXPECT_EQ(r.min_slack, 0.0);   // at t = 0
  for (std::size_t i = 1; i < g.t.size(); ++i) EXPECT_LT(g.x[i], g.a * std::exp(g.b * g.t[i]));
}

TEST(Gronwall, IdentityWithZeroAIsHypothesisViolation) {
  // t <= t²/2 fails on (0, 2).
  auto g = GronwallInstance::sampled([](double t) { return t; }, 0.0, 1.0, 4.0, 401);
  auto r = gronwall_check(g);
  EXPECT_EQ(r.verdict, GronwallVerdict::hypothesis_violated);
  EXPECT_FALSE(r.hypothesis_holds);
  EXPECT_EQ(r.first_hypothesis_violation, 1u);
  EXPECT_FALSE(r.conclusion_holds);
}

TEST(Gronwall, HypothesisRecoveredAfterTwo) {
  auto g = GronwallInstance::sampled([](double t) { return t; }, 0.0, 1.0, 4.0, 401);
  auto r = gronwall_check(g);
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    const bool holds = g.x[i] <= g.a + g.b * r.integral[i] + 1e-12;
    EXPECT_EQ(holds, g.t[i] == 0 || g.t[i] >= 2.0 - 1e-12) << g.t[i];
  }
}

TEST(Gronwall, DampedExponentialsPass) {
  std::mt19937_64 rng(23);
  int validated = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double a = 0.1 + 2 * unit_uniform(rng), b = 3 * unit_uniform(rng);
    const double c = unit_uniform(rng), d = 0.05 * unit_uniform(rng), w = 10 * unit_uniform(rng);
    auto u = [&](double t) { return std::exp(-c * t) * (1 - d * std::pow(std::sin(w * t), 2)); };
    auto g = GronwallInstance::sampled([&](double t) { return a * std::exp(b * t) * u(t); }, a, b, 2.0, 801);
    auto r = gronwall_check(g);
    if (!r.hypothesis_holds) continue;
    ++validated;
    EXPECT_EQ(r.verdict, GronwallVerdict::holds);
    EXPECT_GE(r.min_slack, 0.0);
  }
  EXPECT_GT(validated, 40);
}

TEST(Gronwall, InvalidInstancesRejected) {
  GronwallInstance g;
  g.t = {0, 1};
  g.x = {1, -1};
  EXPECT_THROW(gronwall_check(g), InvalidArgument);
  g.x = {1, 1};
  g.a = -1;
  EXPECT_THROW(gronwall_check(g), InvalidArgument);
  g.a = 1;
  g.t = {0.5, 1};
  EXPECT_THROW(gronwall_check(g), InvalidArgument);
}
