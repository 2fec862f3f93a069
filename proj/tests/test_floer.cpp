#include <gtest/gtest.h>

#include <cmath>

#include "pseudorot/floer/energy.hpp"
#include "pseudorot/floer/io.hpp"
#include "pseudorot/floer/solver.hpp"

using namespace pseudorot;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const double kFrac5 = 5 * kGolden - 3;  // {5α}

ContinuedFraction golden_cf(int depth = 60) {
  ContinuedFraction cf;
  cf.a0 = 0;
  for (int i = 0; i < depth; ++i) cf.quotients.push_back(1);
  cf.tail = TailBound{};
  return cf;
}

struct Setup {
  FloerTarget tg;
  CylinderGrid grid;
};

Setup golden_setup(int Ns, int Nt, long n = 5, double tail = 1e-4) {
  FloerTarget tg = floer_target(golden_cf(), n);
  Truncation tr = choose_truncation(tg, tail, 5000);
  return {tg, CylinderGrid{n, tr.S, Ns, Nt}};
}

FloerSolution zero_field(const CylinderGrid& g) {
  FloerSolution s;
  s.grid = g;
  s.z.assign(g.nodes(), cplx(0, 0));
  s.theta.assign(static_cast<std::size_t>(g.Nt), 0.0);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// grid, target, oracle
// ---------------------------------------------------------------------------

TEST(CylinderGrid, SpacingClosesPeriod) {
  CylinderGrid g{5, 80.0, 256, 512};
  EXPECT_DOUBLE_EQ(g.ht() * g.Nt, 5.0);
  EXPECT_DOUBLE_EQ(g.hs() * g.Ns, 80.0);
  EXPECT_THROW((CylinderGrid{5, 1.0, 16, 31}.validate()), InvalidArgument);
  EXPECT_THROW((CylinderGrid{0, 1.0, 16, 32}.validate()), InvalidArgument);
}

TEST(FloerTarget, GoldenFive) {
  FloerTarget tg = floer_target(golden_cf(), 5);
  EXPECT_EQ(tg.degree, 3);
  EXPECT_NEAR(tg.frac_mid(), 0.0901699, 1e-7);
  EXPECT_NEAR(tg.energy_target(), 0.28327, 1e-5);
}

TEST(FloerTarget, StraddlingEnclosureIsRefused) {
  ContinuedFraction cf = golden_cf(2);  // α ∈ (1/2, 1)
  EXPECT_THROW(floer_target(cf, 5), InsufficientPrecision);
}

TEST(Truncation, TailAndCap) {
  FloerTarget tg = floer_target(golden_cf(), 5);
  Truncation t = choose_truncation(tg, 1e-4, 1e9);
  EXPECT_FALSE(t.capped);
  EXPECT_NEAR(t.tail_level, 1e-4, 1e-12);
  EXPECT_NEAR(t.S, 5 * std::log(1e4) / (2 * kPi * kFrac5), 1e-5);
  Truncation c = choose_truncation(tg, 1e-4, 20);
  EXPECT_TRUE(c.capped);
  EXPECT_EQ(c.S, 20);
  EXPECT_GT(c.tail_level, 1e-4);
}

TEST(Oracle, DegreeTailAndProfile) {
  auto [tg, g] = golden_setup(64, 128);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.3, g);
  EXPECT_EQ(boundary_winding(z), 3);
  EXPECT_NEAR(z.tail_level, 1e-4, 1e-9);
  for (int k = 0; k < g.Nt; ++k) {
    EXPECT_NEAR(std::abs(z(0, k)), 1.0, 1e-15);
    for (int i = 1; i <= g.Ns; ++i) EXPECT_LE(std::abs(z(i, k)), std::abs(z(i - 1, k)));
  }
  EXPECT_NEAR(rigid_l2_s_derivative_exact(tg, 1e6), kPi * kFrac5, 1e-12);
}

TEST(Residual, TrivialCases) {
  CylinderGrid g{3, 10.0, 16, 32};
  FloerSolution z = zero_field(g);
  ResidualField r0 = residual(z, Hamiltonian::rigid(0.0));
  EXPECT_EQ(r0.l2, 0.0);
  ResidualField r1 = residual(z, Hamiltonian::rigid(0.37));
  EXPECT_EQ(r1.max, 0.0);
  FloerSolution bad = z;
  bad.z.pop_back();
  EXPECT_THROW(residual(bad, Hamiltonian::rigid(0.0)), InvalidArgument);
}

TEST(ResidualProperty, OracleResidualIsSecondOrder) {
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  for (int order : {2, 4}) {
    double prev = 0;
    for (int level = 0; level < 3; ++level) {
      auto [tg, g] = golden_setup(32 << level, 64 << level);
      double r = residual(rigid_rotation_exact_solution(tg, 0.0, g, order), H).max;
      if (level > 0) EXPECT_GT(prev / r, 3.5) << "order " << order << " level " << level;
      prev = r;
    }
  }
}

// ---------------------------------------------------------------------------
// linearization and preconditioner
// ---------------------------------------------------------------------------

TEST(LinearizationProperty, TransposeIsAdjoint) {
  auto [tg, g] = golden_setup(16, 32);
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 0.05);
  FloerSolution z = perturb_seed(rigid_rotation_exact_solution(tg, 0.2, g), 0.05, 3);
  floer_detail::Linearization lin(z, H, 0.3);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(lin.layout().size()));
    for (auto& v : x) v = nd(rng);
    std::vector<cplx> y(g.nodes() + static_cast<std::size_t>(g.Nt));
    for (auto& c : y) c = cplx(nd(rng), nd(rng));
    std::vector<cplx> Jx = lin.apply(x);
    double lhs = 0;
    for (std::size_t a = 0; a < y.size(); ++a) lhs += (std::conj(y[a]) * Jx[a]).real();
    const double rhs = x.dot(lin.apply_transpose(y));
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::fabs(lhs)));
  }
}

TEST(LinearizationProperty, MatchesFiniteDifferenceOfResidual) {
  auto [tg, g] = golden_setup(16, 32);
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 0.05);
  FloerSolution z = perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.02, 5);
  floer_detail::Linearization lin(z, H, 0.1);
  Eigen::VectorXd d = Eigen::VectorXd::Random(static_cast<Eigen::Index>(lin.layout().size()));
  const double h = 1e-6;
  auto r = [&](double a) {
    FloerSolution s = floer_detail::stepped(z, d, a);
    return floer_detail::weighted_residual(s, residual(s, H), 0.1);
  };
  std::vector<cplx> rp = r(h), rm = r(-h), Jd = lin.apply(d);
  double err = 0, scale = 0;
  for (std::size_t a = 0; a < Jd.size(); ++a) {
    err = std::max(err, std::abs((rp[a] - rm[a]) / (2 * h) - Jd[a]));
    scale = std::max(scale, std::abs(Jd[a]));
  }
  EXPECT_LT(err, 1e-6 * scale);
}

TEST(PreconditionerProperty, ExactModelConvergesInOneIteration) {
  auto [tg, g] = golden_setup(32, 64);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.7, g);
  floer_detail::Linearization lin(z, H, 0.05);
  const double lambda = 1e-8 * lin.typical_diagonal();
  floer_detail::FourierPreconditioner M(lin, z.degree, floer_detail::circular_offset(z), lambda);
  Eigen::VectorXd b = Eigen::VectorXd::Random(static_cast<Eigen::Index>(lin.layout().size()));
  Eigen::VectorXd x;
  auto pr = floer_detail::pcg([&](const Eigen::VectorXd& v) { return lin.normal(v, lambda); },
                              [&](const Eigen::VectorXd& v) { return M.apply(v); }, b, x, 1e-9, 50);
  EXPECT_TRUE(pr.converged);
  EXPECT_EQ(pr.iterations, 1);
}

TEST(PreconditionerProperty, IsSymmetric) {
  auto [tg, g] = golden_setup(16, 32);
  FloerSolution z = perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.05, 9);
  floer_detail::Linearization lin(z, Hamiltonian::perturbed(kGolden, 0.02), 0.05);
  floer_detail::FourierPreconditioner M(lin, z.degree, floer_detail::circular_offset(z), 1e-6);
  const auto n = static_cast<Eigen::Index>(lin.layout().size());
  Eigen::VectorXd u = Eigen::VectorXd::Random(n), v = Eigen::VectorXd::Random(n);
  const double a = u.dot(M.apply(v)), b = v.dot(M.apply(u));
  EXPECT_NEAR(a, b, 1e-9 * std::fabs(a));
  EXPECT_GT(u.dot(M.apply(u)), 0.0);
}

// ---------------------------------------------------------------------------
// solver
// ---------------------------------------------------------------------------

TEST(SolveFloer, ExactSeedConvergesImmediately) {
  auto [tg, g] = golden_setup(64, 128);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  FloerSolution seed = rigid_rotation_exact_solution(tg, 0.0, g);
  FloerSolution sol = solve_floer(H, tg, g, seed);
  EXPECT_TRUE(sol.converged) << sol.diagnostic;
  EXPECT_LE(sol.iterations, 3);
  for (int it : sol.linear_iterations) EXPECT_EQ(it, 1);
  EXPECT_LT(sol.residual_norm, residual(seed, H).l2);
}

TEST(SolveFloer, RecoversOracleFromNoisySeed) {
  auto [tg, g] = golden_setup(64, 128);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  FloerSolution seed = perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.01, 42);
  FloerSolution sol = solve_floer(H, tg, g, seed);
  ASSERT_TRUE(sol.converged) << sol.diagnostic;
  EXPECT_EQ(sol.fallback_steps, 0);
  EXPECT_LT(max_deviation_from_oracle(sol, tg), 2e-3);
  EXPECT_NEAR(l2_s_derivative(sol), kPi * kFrac5, 0.02 * kPi * kFrac5);
}

TEST(SolveFloer, UnseededPerturbedFamily) {
  auto [tg, g] = golden_setup(64, 128);
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 1e-3);
  FloerSolution sol = solve_floer(H, tg, g);
  ASSERT_TRUE(sol.converged) << sol.diagnostic;
  EXPECT_NEAR(l2_s_derivative(sol), kPi * kFrac5, 0.03 * kPi * kFrac5);
}

TEST(SolveFloer, ReportsNonConvergence) {
  auto [tg, g] = golden_setup(32, 64);
  FloerConfig cfg;
  cfg.max_iterations = 1;
  FloerSolution seed = perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.05, 1);
  FloerSolution sol = solve_floer(Hamiltonian::rigid(kGolden), tg, g, seed, cfg);
  EXPECT_FALSE(sol.converged);
  EXPECT_NE(sol.diagnostic.find("history"), std::string::npos);
  EXPECT_EQ(sol.residual_history.size(), 2u);
}

TEST(SolveFloer, RejectsMismatchedSeed) {
  auto [tg, g] = golden_setup(32, 64);
  FloerSolution seed = rigid_rotation_exact_solution(tg, 0.0, g);
  seed.degree = 2;
  EXPECT_THROW(solve_floer(Hamiltonian::rigid(kGolden), tg, g, seed), InvalidArgument);
  CylinderGrid other = g;
  other.Ns = 48;
  EXPECT_THROW(solve_floer(Hamiltonian::rigid(kGolden), tg, other, rigid_rotation_exact_solution(tg, 0.0, g)),
               InvalidArgument);
}

TEST(SolveFloerProperty, ReportedResidualIsReproduced) {
  auto [tg, g] = golden_setup(32, 64);
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 1e-2);
  FloerSolution sol = solve_floer(H, tg, g, perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.01, 8));
  ResidualField r = residual(sol, H);
  EXPECT_EQ(sol.residual_norm, r.l2);
  EXPECT_EQ(sol.residual_max, r.max);
}

TEST(SolveFloerProperty, WindingIsConserved) {
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 1e-2);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto [tg, g] = golden_setup(32, 64);
    FloerSolution s0 = perturb_seed(rigid_rotation_exact_solution(tg, 0.1 * seed, g), 0.03, seed);
    FloerSolution sol = solve_floer(H, tg, g, s0);
    EXPECT_EQ(boundary_winding(sol), tg.degree);
    EXPECT_TRUE(floer_detail::lift_is_admissible(sol.theta, sol.degree));
    for (int k = 0; k < g.Nt; ++k) EXPECT_NEAR(std::abs(sol(0, k)), 1.0, 1e-14);
  }
  std::vector<double> jump = {0.0, 0.1, 3.5, 3.6};
  EXPECT_FALSE(floer_detail::lift_is_admissible(jump, 0));
}

TEST(SolveFloerProperty, RigidSolutionsAreRadiallyMonotone) {
  auto [tg, g] = golden_setup(64, 128);
  FloerSolution sol = solve_floer(Hamiltonian::rigid(kGolden), tg, g,
                                  perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.01, 2));
  ASSERT_TRUE(sol.converged);
  for (int k = 0; k < g.Nt; ++k)
    for (int i = 1; i <= g.Ns; ++i) EXPECT_LE(std::abs(sol(i, k)), std::abs(sol(i - 1, k)) + 1e-12);
  for (const cplx& c : sol.z) EXPECT_LE(std::abs(c), 1.0 + 1e-14);
}

// ---------------------------------------------------------------------------
// energies and norms
// ---------------------------------------------------------------------------

TEST(Energy, ZeroFieldHasZeroEnergy) {
  FloerSolution z = zero_field(CylinderGrid{2, 5.0, 8, 16});
  Hamiltonian H = Hamiltonian::rigid(0.0);
  EXPECT_EQ(floer_energy(z, H), 0.0);
  EXPECT_EQ(l2_s_derivative(z), 0.0);
}

TEST(Energy, OracleL2MatchesFractionalPart) {
  auto [tg, g] = golden_setup(256, 64);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.0, g);
  EXPECT_NEAR(l2_s_derivative(z), 0.28327, 0.001);
  EnergyIdentity e = energy_identity(z, tg);
  EXPECT_GT(e.tail_term, 0.0);
  EXPECT_LT(e.tail_term, 1e-8);
}

TEST(EnergyProperty, QuadratureErrorIsSecondOrder) {
  double prev = 0;
  for (int level = 0; level < 3; ++level) {
    auto [tg, g] = golden_setup(128 << level, 32);
    const double err = std::fabs(l2_s_derivative(rigid_rotation_exact_solution(tg, 0.0, g)) -
                                 rigid_l2_s_derivative_exact(tg, g.S));
    if (level > 0) EXPECT_NEAR(prev / err, 4.0, 0.3);
    prev = err;
  }
}

TEST(EnergyProperty, FloerEnergyDominatesL2) {
  auto [tg, g] = golden_setup(32, 64);
  Hamiltonian H = Hamiltonian::perturbed(kGolden, 1e-2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    FloerSolution cand = perturb_seed(rigid_rotation_exact_solution(tg, 0.0, g), 0.2, seed);
    const double ef = floer_energy(cand, H), l2 = l2_s_derivative(cand);
    EXPECT_GE(ef, l2);
    EXPECT_GE(l2, 0.0);
  }
  FloerSolution sol = solve_floer(H, tg, g);
  EXPECT_GE(floer_energy(sol, H), l2_s_derivative(sol));
}

TEST(Energy, ReportOnSolution) {
  auto [tg, g] = golden_setup(64, 128);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  FloerSolution sol = solve_floer(H, tg, g);
  EnergyReport e = energy_report(sol, H, tg);
  EXPECT_EQ(e.e_lambda, 5.0);
  EXPECT_LT(e.relative_error, 0.02);
  EXPECT_NEAR(e.e_omega, kPi * kFrac5, 0.02 * kPi * kFrac5);
  // On solutions both integrands of the Floer energy carry the same mass.
  EXPECT_NEAR(e.floer_energy, 2 * e.l2_s_derivative, 1e-3);
  EXPECT_LE(e.target_lo, e.target_hi);
}

TEST(Norms, OracleSupNormAtBoundary) {
  auto [tg, g] = golden_setup(512, 64);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.0, g);
  EXPECT_NEAR(sup_norm_s_derivative(z), 2 * kPi * kFrac5 / 5, 1e-3);
}

TEST(Norms, InterpolationChainOnOracle) {
  auto [tg, g] = golden_setup(256, 128);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.0, g);
  const double c = 6 * std::sqrt(12.0);
  InterpolationCheck chk = interpolation_bound_check(z, c);
  EXPECT_TRUE(chk.holds);
  EXPECT_LE(chk.ratio, c);
  EXPECT_TRUE(chk.b_empirical);
  EXPECT_NEAR(chk.M, std::sqrt(c * chk.w1inf_norm) * std::pow(kPi, 0.25), 1e-12);
  InterpolationCheck fixed = interpolation_bound_check(z, c, 2.0);
  EXPECT_FALSE(fixed.b_empirical);
  EXPECT_EQ(fixed.b, 2.0);
}

// ---------------------------------------------------------------------------
// induced field, filling, lift
// ---------------------------------------------------------------------------

TEST(InducedField, RigidDeviationIsFractionalRate) {
  auto [tg, g] = golden_setup(64, 160);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  std::vector<FloerSolution> fam = {rigid_rotation_exact_solution(tg, 0.0, g),
                                    rigid_rotation_exact_solution(tg, 1.0, g)};
  InducedVectorField a = induced_vector_field(fam, H, 0.25);
  InducedVectorField b = induced_vector_field(fam, H, 1.25);
  EXPECT_NEAR(a.max_deviation_boundary, 2 * kPi * kFrac5 / 5, 1e-4);
  // exactly the discrete symbol of the t-stencil on the degree-3 mode
  const double sigma = floer_detail::dt_symbol(2 * kPi * 3 / g.Nt, g.ht(), 4);
  EXPECT_NEAR(a.max_deviation_boundary, 2 * kPi * kGolden - sigma, 1e-12);
  EXPECT_NEAR(a.max_deviation, a.max_deviation_boundary, 1e-12);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].point, b.samples[i].point);
    EXPECT_EQ(a.samples[i].value, b.samples[i].value);
  }
  EXPECT_THROW(induced_vector_field({}, H, 0.0), InvalidArgument);
}

TEST(InducedField, DeviationShrinksAlongBetterApproximations) {
  // {nα}/n for n = 5, 13, 34 (Fibonacci denominators of the golden ratio).
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  double prev = 1e9;
  for (long n : {5L, 13L, 34L}) {
    FloerTarget tg = floer_target(golden_cf(), n);
    CylinderGrid g{n, 10.0, 16, static_cast<int>(32 * n)};
    InducedVectorField f = induced_vector_field({rigid_rotation_exact_solution(tg, 0.0, g)}, H, 0.0);
    EXPECT_LT(f.max_deviation, prev);
    prev = f.max_deviation;
  }
}

TEST(Filling, RigidFamilyCoversAnnulus) {
  auto [tg, g] = golden_setup(128, 256);
  std::vector<FloerSolution> fam;
  for (int j = 0; j < 4; ++j) fam.push_back(rigid_rotation_exact_solution(tg, j * kPi / 8, g));
  std::vector<Vec2> probes;
  for (double r : {0.9, 0.5, 0.1, 0.01, 2e-3})
    for (int a = 0; a < 7; ++a) probes.emplace_back(r * std::cos(a * 0.9), r * std::sin(a * 0.9));
  FillingReport rep = filling_check(fam, probes);
  EXPECT_EQ(rep.covered_fraction, 1.0);
  FillingReport inner = filling_check(fam, {Vec2(1e-6, 0)});
  EXPECT_FALSE(inner.probes[0].covered);
  EXPECT_THROW(filling_check(fam, {Vec2(0, 0)}), InvalidArgument);
}

TEST(Filling, InnerRadiusShrinksWithS) {
  FloerTarget tg = floer_target(golden_cf(), 5);
  double prev = 2;
  for (double S : {20.0, 40.0, 80.0}) {
    FillingReport r = filling_check({rigid_rotation_exact_solution(tg, 0.0, CylinderGrid{5, S, 32, 64})},
                                    {Vec2(0.5, 0)});
    EXPECT_LT(r.inner_radius, prev);
    prev = r.inner_radius;
  }
}

TEST(Lift, OracleEnergies) {
  auto [tg, g] = golden_setup(512, 128);
  Hamiltonian H = Hamiltonian::rigid(kGolden);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.0, g);
  MappingTorusLift L = lift_to_mapping_torus(z, H, 1.5, 2.0);
  EXPECT_NEAR(L.e_omega, kPi * kFrac5, 2e-4);
  EXPECT_EQ(L.e_lambda, 5.0);
  EXPECT_TRUE(L.e_lambda_derived);
  EXPECT_EQ(L.tau_degree, 1);
  EXPECT_EQ(L.z_degree, 3);
  EXPECT_LT(L.cr_residual_max, 1e-3);
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

TEST(Export, CsvLayout) {
  auto [tg, g] = golden_setup(4, 8);
  FloerSolution z = rigid_rotation_exact_solution(tg, 0.0, g);
  csv::Table t = csv::parse(solution_csv(z));
  EXPECT_EQ(t.header, (std::vector<std::string>{"s", "t", "re_z", "im_z"}));
  ASSERT_EQ(t.rows.size(), g.nodes());
  EXPECT_EQ(std::stod(t.rows[0][2]), 1.0);
}

TEST(Export, GridDumpRoundTrip) {
  auto [tg, g] = golden_setup(8, 16);
  FloerSolution z = perturb_seed(rigid_rotation_exact_solution(tg, 0.4, g), 0.01, 3);
  std::string bytes = encode_grid_dump(z);
  EXPECT_EQ(bytes.substr(0, 4), "FLRG");
  EXPECT_EQ(bytes.size(), 4u + 4 + 8 + 8 + 4 + 4 + g.nodes() * 16);
  FloerSolution back = decode_grid_dump(bytes);
  EXPECT_EQ(back.grid.n, 5);
  EXPECT_EQ(back.grid.S, g.S);
  EXPECT_EQ(back.z, z.z);
  EXPECT_EQ(back.degree, 3);
  bytes[0] = 'X';
  EXPECT_THROW(decode_grid_dump(bytes), InvalidArgument);
  EXPECT_THROW(decode_grid_dump(encode_grid_dump(z).substr(0, 40)), InvalidArgument);
}
