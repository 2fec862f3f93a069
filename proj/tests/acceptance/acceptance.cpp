// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pseudorot/analysis/sobolev.hpp"
#include "pseudorot/floer/energy.hpp"
#include "pseudorot/floer/solver.hpp"
#include "pseudorot/rigidity/c0.hpp"
#include "pseudorot/rigidity/experiment.hpp"
#include "pseudorot/rigidity/mixing.hpp"

using namespace pseudorot;

namespace {

// Pinned tolerances.
constexpr double kL2RelTol = 0.02;              // criterion 1
constexpr double kCrit1Seconds = 300;
constexpr double kOracleDevTol = 1e-3;          // criterion 2
constexpr double kOrderTol = 0.05;              // |observed order - 2|
constexpr double kSobolevSeconds = 60;          // criterion 3
constexpr int kSobolevTrials = 100;
constexpr double kCrit4Seconds = 10;            // criterion 4
constexpr double kChordTol = 1e-6;              // criterion 5
constexpr long kChordNMax = 100;
constexpr double kRigidTimeD = 0.1;             // criterion 7
constexpr long kMixingSamples = 100000;
constexpr double kMinProduct = 0.01;
constexpr double kAreaTol = 1e-6;               // criterion 8

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ContinuedFraction golden_cf() {
  ContinuedFraction cf;
  cf.a0 = 0;
  for (int i = 0; i < 60; ++i) cf.quotients.push_back(1);
  cf.tail = TailBound{};
  return cf;
}

ContinuedFraction lstar_cf() { return construct_lstar(3, Integer(0), {Integer(3)}); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Converged solutions collected for criteria 6 and 8.
struct Solved {
  std::string name;
  Hamiltonian H;
  FloerTarget tg;
  FloerSolution sol;
};
std::vector<Solved> solved;

}  // namespace

int main() {
  const ContinuedFraction golden = golden_cf();
  const FloerTarget tg5 = floer_target(golden, 5);
  const Truncation tr5 = choose_truncation(tg5, 1e-4, 5000);
  const Hamiltonian Hg = Hamiltonian::rigid(kGolden);
  FloerSolution coarse, fine;

  report(1, "Floer L2 identity", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const CylinderGrid g{5, tr5.S, 256, 512};
    coarse = solve_floer(Hg, tg5, g, perturb_seed(rigid_rotation_exact_solution(tg5, 0.0, g), 0.01, 42));
    const double secs = seconds_since(t0);
    const double l2 = l2_s_derivative(coarse), target = kPi * tg5.frac_mid();
    const double rel = std::fabs(l2 - target) / target;
    if (coarse.converged) solved.push_back({"golden n=5 256x512", Hg, tg5, coarse});
    return Outcome{coarse.converged && rel <= kL2RelTol && secs <= kCrit1Seconds,
                   "|d_s z|^2 = " + fmt("%.6f", l2) + " vs pi{5a} = " + fmt("%.6f", target) + ", rel " +
                       fmt("%.2e", rel) + ", S = " + fmt("%.1f", tr5.S) + ", converged " + (coarse.converged ? "yes" : "no")};
  });

  report(2, "oracle recovery", [&] {
    if (!coarse.converged) return Outcome{false, "criterion 1 solve did not converge"};
    const CylinderGrid g{5, tr5.S, 512, 1024};
    fine = solve_floer(Hg, tg5, g, perturb_seed(rigid_rotation_exact_solution(tg5, 0.0, g), 0.01, 42));
    if (fine.converged) solved.push_back({"golden n=5 512x1024", Hg, tg5, fine});
    const double d1 = max_deviation_from_oracle(coarse, tg5), d2 = max_deviation_from_oracle(fine, tg5);
    const double ratio = d1 / d2, order = std::log2(ratio);
    return Outcome{fine.converged && d1 <= kOracleDevTol && std::fabs(order - 2) <= kOrderTol,
                   "deviation " + fmt("%.3e", d1) + " -> " + fmt("%.3e", d2) + ", ratio " + fmt("%.3f", ratio) +
                       ", order " + fmt("%.3f", order)};
  });

  report(3, "Sobolev suite", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    for (auto d : {SobolevDomain::cylinder, SobolevDomain::half_cylinder}) {
      const SobolevTable t = estimate_sobolev_constant(d, {1, 4, 16}, kSobolevTrials, 7);
      ok = ok && t.all_within_bound && t.period_independent;
      detail += to_string(d) + " max " + fmt("%.4f", t.max_ratio) + " (bound " + fmt("%.2f", t.bound) +
                "), spread " + fmt("%.4f", t.spread) + "; ";
    }
    const double secs = seconds_since(t0);
    return Outcome{ok && secs <= kSobolevSeconds, detail + "periods 1, 4, 16"};
  });

  report(4, "certified rigidity instance", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const ContinuedFraction cf = lstar_cf();
    const auto cs = convergents(cf);
    const Integer q2 = cs[2].q;
    const FractionalPartEnclosure f = fractional_part_multiple(cf, q2);
    const Certainty small = less_than_exp_neg(f.upper, Integer(128));
    const RationalInterval chord = chord_enclosure({f.lower, f.upper});
    const Rational limit = make_rational(Integer(1), boost::multiprecision::pow(Integer(10), 50));
    const bool ok = q2 == 64 && cf.quotients[1] == 21 && small == Certainty::certified && chord.hi < limit &&
                    seconds_since(t0) <= kCrit4Seconds;
    return Outcome{ok, "q2 = " + q2.str() + ", {q2 a} < e^-128 " + to_string(small) + ", d <= " +
                           format_scientific(chord.hi, 6)};
  });

  report(5, "rigid flow oracle", [&] {
    const double ah = to_double(value_enclosure(lstar_cf()).range.lo);
    const Hamiltonian H = Hamiltonian::rigid(ah);
    std::vector<long> ns;
    for (long n = 0; n <= kChordNMax; ++n) ns.push_back(n);
    FlowConfig fc;
    fc.step = 5e-3;
    const auto ms = c0_distances(H, ns, ProbeGrid::polar(0.1), 0.0, fc);
    double worst = 0;
    for (const auto& m : ms) worst = std::max(worst, std::fabs(m.measured - 2 * std::fabs(std::sin(kPi * m.n * ah))));
    return Outcome{worst <= kChordTol, "max |d - 2|sin(pi n a)|| = " + fmt("%.2e", worst) + " over n <= 100"};
  });

  report(6, "Gronwall nodewise", [&] {
    // Two more converged solutions: the perturbed golden problem and the complement row
    // of the perturbed L* family.
    {
      const CylinderGrid g{5, tr5.S, 128, 256};
      const Hamiltonian H = Hamiltonian::perturbed(kGolden, 1e-2);
      FloerSolution s = solve_floer(H, tg5, g);
      if (s.converged) solved.push_back({"perturbed golden n=5", H, tg5, s});
    }
    {
      const ContinuedFraction cf = lstar_cf();
      const RigiditySequence seq = rigidity_sequence(cf, 1, SelectionPolicy::smallest);
      const FloerTarget t = complement_floer_target(seq.entries.at(0), value_enclosure(cf).range);
      const Hamiltonian H = Hamiltonian::perturbed(to_double(value_enclosure(cf).range.lo), 1e-2).inverse();
      const Truncation tr = choose_truncation(t, 1e-4, 2000);
      FloerSolution s = solve_floer(H, t, CylinderGrid{t.n, tr.S, 128, static_cast<int>(64 * t.n)});
      if (s.converged) solved.push_back({"perturbed L* n=3 inverse", H, t, s});
    }
    long nodes = 0, violations = 0;
    double worst = 0;
    for (const auto& s : solved) {
      const GronwallSweep sw = gronwall_sweep(s.H, s.sol, hessian_bound(s.H).B);
      nodes += sw.nodes;
      violations += sw.violations;
      worst = std::max(worst, sw.max_ratio);
    }
    return Outcome{solved.size() == 4 && violations == 0,
                   std::to_string(solved.size()) + " converged solutions, " + std::to_string(nodes) + " nodes, " +
                       std::to_string(violations) + " violations, max lhs/rhs " + fmt("%.4f", worst)};
  });

  report(7, "mixing obstruction", [&] {
    const ContinuedFraction cf = lstar_cf();
    const Hamiltonian H = Hamiltonian::perturbed(to_double(value_enclosure(cf).range.lo), 1e-2);
    const RigiditySequence seq = rigidity_sequence(cf, 2, SelectionPolicy::smallest);
    std::vector<long> ns;
    for (const auto& e : seq.entries) ns.push_back(e.n.convert_to<long>());
    FlowConfig fc;
    fc.step = 0.01;
    const auto ds = c0_distances(H, ns, ProbeGrid::polar(0.05), 0.0, fc);
    std::vector<long> times;
    std::string dd;
    for (const auto& m : ds) {
      dd += "d(" + std::to_string(m.n) + ") = " + fmt("%.3e", m.measured) + ", ";
      if (m.measured < kRigidTimeD) times.push_back(m.n);
    }
    if (times.empty()) return Outcome{false, dd + "no rigidity time with d < 0.1"};
    const DiskRegion A{{AnnularSector{0.2, 1.0, -kPi / 3, kPi / 3}}};
    const DiskRegion B{{AnnularSector{0.2, 1.0, 2 * kPi / 3, 4 * kPi / 3}}};
    MixingConfig mc;
    mc.samples = kMixingSamples;
    mc.seed = 7;
    const MixingProbe p = mixing_probe(H, A, B, times, mc);
    long hits = 0;
    for (const auto& r : p.rows) hits += r.hits;
    return Outcome{hits == 0 && p.product >= kMinProduct && std::fabs(p.separation - 0.2) < 1e-3,
                   dd + std::to_string(hits) + " hits over " + std::to_string(times.size()) + " x " +
                       std::to_string(kMixingSamples) + " samples, mu(A)mu(B) = " + fmt("%.4f", p.product) +
                       ", separation " + fmt("%.4f", p.separation)};
  });

  report(8, "property suites", [&] {
    std::string bad;
    // convergent determinant identity p_m q_{m-1} - p_{m-1} q_m = (-1)^{m-1}
    for (const ContinuedFraction& cf : {golden, lstar_cf()}) {
      const auto cs = convergents(cf);
      for (std::size_t m = 1; m < cs.size(); ++m)
        if (cs[m].p * cs[m - 1].q - cs[m - 1].p * cs[m].q != ((m % 2) ? 1 : -1)) bad += "determinant ";
    }
    // area preservation
    std::mt19937_64 rng(5);
    const Hamiltonian Hp = Hamiltonian::perturbed(0.328125, 1e-2);
    double area = 0;
    for (int i = 0; i < 20; ++i) {
      const double r = 0.9 * std::sqrt(unit_uniform(rng)), th = 2 * kPi * unit_uniform(rng);
      area = std::max(area, std::fabs(jacobian_determinant(Hp, Vec2(r * std::cos(th), r * std::sin(th)), 1e-4) - 1));
    }
    if (area > kAreaTol) bad += "area ";
    // winding conservation and energy monotonicity on every converged solution
    for (const auto& s : solved) {
      if (boundary_winding(s.sol) != s.tg.degree) bad += "winding(" + s.name + ") ";
      if (floer_energy(s.sol, s.H) < l2_s_derivative(s.sol)) bad += "energy(" + s.name + ") ";
    }
    // Sobolev scale invariance
    std::mt19937_64 prng(11);
    for (auto d : {SobolevDomain::plane, SobolevDomain::half_plane, SobolevDomain::cylinder, SobolevDomain::half_cylinder}) {
      const SobolevProbe f = random_probe(d, 4, prng);
      const double r0 = sobolev_ratio(f).ratio;
      for (double lam : {-3.0, 1e-6, 7e5})
        if (std::fabs(sobolev_ratio(scaled(f, lam)).ratio - r0) > 8 * std::numeric_limits<double>::epsilon() * r0)
          bad += "scale ";
    }
    // determinism of CSV outputs across thread counts
    RigidityConfig rc;
    rc.alpha = lstar_cf();
    rc.J = 2;
    rc.policy = SelectionPolicy::smallest;
    rc.family.kind = FamilyKind::perturbed;
    rc.probe_h = 0.25;
    rc.flow.step = 0.02;
    rc.floer_Ns = 64;
    rc.floer_nt_per_unit = 32;
    rc.sobolev_trials = 6;
    const std::size_t saved = thread_count();
    set_thread_count(1);
    const std::string a = run_rigidity_experiment(rc).csv();
    set_thread_count(3);
    const std::string b = run_rigidity_experiment(rc).csv();
    set_thread_count(saved);
    if (a != b) bad += "determinism ";
    return Outcome{bad.empty(), bad.empty() ? "determinant, area (max |det-1| " + fmt("%.1e", area) +
                                                  "), winding, energy, scale invariance, determinism"
                                            : "failed: " + bad};
  });

  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
