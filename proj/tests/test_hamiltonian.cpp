#include <gtest/gtest.h>

#include <random>

#include "pseudorot/hamiltonian/flow.hpp"

using namespace pseudorot;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

Vec2 rotate(const Vec2& p, double turns) {
  double a = 2 * kPi * turns;
  return {std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y()};
}

std::vector<Hamiltonian> sample_family() {
  return {Hamiltonian::rigid(kGolden), Hamiltonian::perturbed(0.3, 0.05),
          Hamiltonian::perturbed(0.41, 0.02, ModeSpec{3, 2, 2, 0.7, 1.0}),
          Hamiltonian::staged(0.328, {ModeSpec{2, 1, 0, 0.3, 0.4}, ModeSpec{1, 1, 0, 1.1, 0.3}})};
}

Vec2 random_disk_point(std::mt19937_64& rng, double rmax = 1.0) {
  std::uniform_real_distribution<double> u(0, 1);
  double r = rmax * std::sqrt(u(rng)), a = 2 * kPi * u(rng);
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace

// ---------------------------------------------------------------------------
// vector fields and jets
// ---------------------------------------------------------------------------

TEST(VectorField, RigidAtUnitPoint) {
  Vec2 v = Hamiltonian::rigid(0.25).vector_field(0.3, Vec2(1, 0));
  EXPECT_NEAR(v.x(), 0.0, 1e-15);
  EXPECT_NEAR(v.y(), 2 * kPi * 0.25, 1e-15);
}

TEST(VectorField, OriginIsRestPoint) {
  for (const auto& H : sample_family())
    for (double t : {0.0, 0.17, 0.5, 0.93}) {
      Vec2 v = H.vector_field(t, Vec2(0, 0));
      EXPECT_EQ(v.x(), 0.0);
      EXPECT_EQ(v.y(), 0.0);
    }
}

TEST(VectorField, ZeroEpsilonMatchesRigid) {
  Hamiltonian a = Hamiltonian::perturbed(0.3, 0.0), b = Hamiltonian::rigid(0.3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    Vec2 p = random_disk_point(rng);
    EXPECT_EQ(a.vector_field(0.4, p), b.vector_field(0.4, p));
  }
}

TEST(JetProperty, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  const double h = 1e-5;
  for (const auto& H : sample_family())
    for (int i = 0; i < 40; ++i) {
      Vec2 p = random_disk_point(rng, 0.95);
      double t = std::uniform_real_distribution<double>(0, 1)(rng);
      HessianSample s = H.second_order(t, p.x(), p.y());
      double gx = (H.value(t, p.x() + h, p.y()) - H.value(t, p.x() - h, p.y())) / (2 * h);
      double gy = (H.value(t, p.x(), p.y() + h) - H.value(t, p.x(), p.y() - h)) / (2 * h);
      EXPECT_NEAR(s.gradient.x(), gx, 1e-6);
      EXPECT_NEAR(s.gradient.y(), gy, 1e-6);
      Vec2 gxp = H.gradient(t, p.x() + h, p.y()), gxm = H.gradient(t, p.x() - h, p.y());
      EXPECT_NEAR(s.hessian(0, 0), (gxp.x() - gxm.x()) / (2 * h), 1e-5);
      EXPECT_NEAR(s.hessian(0, 1), (gxp.y() - gxm.y()) / (2 * h), 1e-5);
      EXPECT_EQ(s.hessian(0, 1), s.hessian(1, 0));
    }
}

TEST(HamiltonianProperty, BoundaryConstantAndPeriodic) {
  for (const auto& H : sample_family())
    for (double t : {0.0, 0.21, 0.66}) {
      double v0 = H.value(t, 1, 0);
      for (int k = 1; k < 64; ++k) {
        double a = 2 * kPi * k / 64;
        EXPECT_NEAR(H.value(t, std::cos(a), std::sin(a)), v0, 1e-12);
        EXPECT_NEAR(H.value(t + 1, 0.3 * std::cos(a), 0.5 * std::sin(a)),
                    H.value(t, 0.3 * std::cos(a), 0.5 * std::sin(a)), 1e-12);
      }
    }
}

TEST(HamiltonianProperty, InverseNegatesAndReflectsTime) {
  Hamiltonian H = Hamiltonian::perturbed(0.3, 0.05);
  Hamiltonian G = H.inverse();
  EXPECT_TRUE(G.is_inverse());
  EXPECT_FALSE(G.inverse().is_inverse());
  EXPECT_DOUBLE_EQ(G.value(0.2, 0.3, 0.4), -H.value(-0.2, 0.3, 0.4));
}

// ---------------------------------------------------------------------------
// flows and iterates
// ---------------------------------------------------------------------------

TEST(Flow, RigidUnitTime) {
  Trajectory tr = flow(Hamiltonian::rigid(kGolden), Vec2(1, 0), 0, 1);
  Vec2 e = rotate(Vec2(1, 0), kGolden);
  EXPECT_NEAR((tr.points.back() - e).norm(), 0.0, 2e-11);  // RK4, h = 1e-3
  EXPECT_EQ(tr.times.back(), 1.0);
  EXPECT_EQ(tr.order, 4);
}

TEST(Flow, ZeroTimeIsSinglePoint) {
  Trajectory tr = flow(Hamiltonian::perturbed(0.3, 0.1), Vec2(0.2, 0.1), 0.4, 0.4);
  ASSERT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.points[0], Vec2(0.2, 0.1));
}

TEST(Flow, OriginStaysPut) {
  for (const auto& H : sample_family()) {
    Trajectory tr = flow(H, Vec2(0, 0), 0, 3.5);
    for (const auto& p : tr.points) EXPECT_EQ(p, Vec2(0, 0));
    EXPECT_EQ(iterate(H, Vec2(0, 0), 17), Vec2(0, 0));
  }
}

TEST(Flow, DriftIsReported) {
  FlowConfig cfg;
  cfg.step = 0.5;
  cfg.drift_tol = 1e-12;
  Hamiltonian H = Hamiltonian::rigid(3.0);
  EXPECT_THROW(flow(H, Vec2(1, 0), 0, 5, cfg), IntegrationDrift);
  EXPECT_THROW(flow(H, Vec2(1.1, 0), 0, 1), IntegrationDrift);
}

TEST(Flow, StepHalvingValidation) {
  FlowConfig cfg;
  cfg.validate = true;
  Trajectory tr = flow(Hamiltonian::perturbed(0.3, 0.05), Vec2(0.5, 0.2), 0, 2, cfg);
  ASSERT_TRUE(tr.validation_error.has_value());
  EXPECT_LT(*tr.validation_error, 1e-11);
}

TEST(Flow, AdaptiveAgreesWithFixedStep) {
  FlowConfig ad;
  ad.method = Integrator::dopri5;
  ad.rtol = 1e-12;
  Hamiltonian H = Hamiltonian::staged(0.328, {ModeSpec{2, 1, 0, 0.3, 0.4}});
  Vec2 a = flow_to(H, Vec2(0.4, -0.3), 0, 2, ad);
  FlowConfig fine;
  fine.step = 2.5e-4;
  Vec2 b = flow_to(H, Vec2(0.4, -0.3), 0, 2, fine);
  EXPECT_LT((a - b).norm(), 1e-9);
}

TEST(Iterate, RigidRotationComposition) {
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  Vec2 p(0.3, -0.6);
  for (long n : {0L, 1L, 5L, 13L}) {
    Vec2 e = rotate(p, kGolden * static_cast<double>(n));
    EXPECT_NEAR((iterate(H, p, n) - e).norm(), 0.0, 2e-11 * (1.0 + static_cast<double>(n)));
  }
  EXPECT_NEAR((iterate(H, p, -3) - rotate(p, -3 * kGolden)).norm(), 0.0, 8e-11);
}

TEST(IterateProperty, FlowComposition) {
  std::mt19937_64 rng(4);
  for (const auto& H : sample_family())
    for (int i = 0; i < 5; ++i) {
      Vec2 p = random_disk_point(rng);
      Vec2 lhs = iterate(H, iterate(H, p, 2), 3);
      Vec2 rhs = iterate(H, p, 5);
      EXPECT_LT((lhs - rhs).norm(), 1e-9);
    }
}

TEST(IterateProperty, Reversibility) {
  std::mt19937_64 rng(5);
  for (const auto& H : sample_family())
    for (int i = 0; i < 5; ++i) {
      Vec2 p = random_disk_point(rng);
      Vec2 q = flow_to(H, flow_to(H, p, 0, 1), 1, 0);
      EXPECT_LT((q - p).norm(), 2e-10);
    }
}

TEST(IterateProperty, InverseHamiltonianInvertsTimeOneMap) {
  std::mt19937_64 rng(6);
  for (const auto& H : sample_family())
    for (int i = 0; i < 5; ++i) {
      Vec2 p = random_disk_point(rng);
      Vec2 q = time_one_map(H.inverse(), time_one_map(H, p));
      EXPECT_LT((q - p).norm(), 1e-9);
    }
}

TEST(IterateProperty, BoundaryInvariance) {
  for (const auto& H : sample_family())
    for (int k = 0; k < 16; ++k) {
      double a = 2 * kPi * k / 16;
      Trajectory tr = flow(H, Vec2(std::cos(a), std::sin(a)), 0, 3);
      for (const auto& p : tr.points) EXPECT_NEAR(p.norm(), 1.0, 1e-9);
    }
}

TEST(IterateProperty, AreaPreservation) {
  std::mt19937_64 rng(7);
  FlowConfig cfg;
  for (const auto& H : sample_family())
    for (int i = 0; i < 8; ++i) {
      Vec2 p = random_disk_point(rng, 0.9);
      EXPECT_NEAR(jacobian_determinant(H, p, 1e-4, cfg), 1.0, 1e-6);
    }
}

TEST(IterateProperty, StagedTimeOneMapIsConjugateRotation) {
  // The boundary is rotated rigidly and the origin fixed; the time-one map
  // is conjugate to rotation, so its iterates stay on a closed invariant curve
  // and the distance to the origin of every orbit is bounded away from 0.
  Hamiltonian H = Hamiltonian::staged(0.25, {ModeSpec{2, 1, 0, 0.3, 0.5}});
  Vec2 p(0.5, 0.1);
  FlowConfig fine;
  fine.step = 2.5e-4;
  Vec2 q = iterate(H, p, 4, fine);  // rotation by a full turn under conjugacy
  EXPECT_LT((q - p).norm(), 1e-9);
}

// ---------------------------------------------------------------------------
// rotation number and Hessian bound
// ---------------------------------------------------------------------------

TEST(RotationNumber, RigidAndPerturbed) {
  for (const auto& H : {Hamiltonian::rigid(kGolden), Hamiltonian::perturbed(kGolden, 0.05)}) {
    RotationEstimate r = boundary_rotation_number(H, 20);
    EXPECT_NEAR(r.value, kGolden, r.error_band);
    EXPECT_DOUBLE_EQ(r.error_band, 1.0 / 20);
  }
  EXPECT_DOUBLE_EQ(boundary_rotation_number(Hamiltonian::rigid(0.3), 40).error_band, 1.0 / 40);
}

TEST(RotationNumber, InverseNegates) {
  RotationEstimate r = boundary_rotation_number(Hamiltonian::rigid(0.3).inverse(), 10);
  EXPECT_NEAR(r.value, -0.3, 1e-9);
}

TEST(HessianBoundTest, RigidIsExact) {
  HessianBound b = hessian_bound(Hamiltonian::rigid(kGolden), 4, 8, 16);
  EXPECT_NEAR(b.B, 2 * kPi * kGolden, 1e-12);
}

TEST(HessianBoundTest, ZeroHamiltonian) {
  EXPECT_EQ(hessian_bound(Hamiltonian::rigid(0.0), 4, 8, 16).B, 0.0);
}

TEST(HessianBoundTest, PerturbedTriangleInequality) {
  const double eps = 0.05;
  HessianBound full = hessian_bound(Hamiltonian::perturbed(0.3, eps), 16, 24, 48);
  HessianBound f = hessian_bound(Hamiltonian(PerturbedFamily{0.0, 1.0, ModeSpec{}}), 16, 24, 48);
  EXPECT_LE(full.grid_max, 2 * kPi * 0.3 + eps * f.grid_max + 1e-12);
  EXPECT_GE(full.B, full.grid_max);
}

TEST(HessianBoundProperty, DominatesRandomSamples) {
  std::mt19937_64 rng(8);
  for (const auto& H : sample_family()) {
    HessianBound b = hessian_bound(H, 32, 32, 64);
    for (int i = 0; i < 2000; ++i) {
      Vec2 p = random_disk_point(rng);
      double t = std::uniform_real_distribution<double>(0, 1)(rng);
      EXPECT_LE(spectral_norm(H.hessian(t, p.x(), p.y())), b.B);
    }
  }
}

TEST(TrajectoryExport, CsvHasHeaderAndRows) {
  Trajectory tr = flow(Hamiltonian::rigid(0.1), Vec2(1, 0), 0, 0.01);
  csv::Table t = csv::parse(trajectory_csv(tr));
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "x", "y"}));
  EXPECT_EQ(t.rows.size(), tr.points.size());
}
