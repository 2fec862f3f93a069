#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pseudorot/analysis/sobolev.hpp"
#include "pseudorot/diophantine/lstar.hpp"
#include "pseudorot/floer/energy.hpp"
#include "pseudorot/floer/solver.hpp"
#include "pseudorot/hamiltonian/families.hpp"
#include "pseudorot/rigidity/c0.hpp"

namespace pseudorot {

// Decimal scientific form with `digits` significant digits, exact from the rational.
// Values whose decimal exponent exceeds 10⁵ in size are written as exp(<natural log>).
inline std::string format_scientific(const Rational& r, int digits = 17) {
  if (r == 0) return "0";
  if (r < 0) return "-" + format_scientific(-r, digits);
  const double l10 = log_abs(r) / std::log(10.0);
  if (std::fabs(l10) > 1e5) return "exp(" + csv::format_double(log_abs(r)) + ")";
  long e = static_cast<long>(std::floor(l10));
  auto pow10 = [](long k) -> Integer { return boost::multiprecision::pow(Integer(10), static_cast<unsigned>(k)); };
  std::string ds;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const long shift = digits - 1 - e;
    Rational s = shift >= 0 ? r * Rational(pow10(shift)) : r / Rational(pow10(-shift));
    ds = floor(s + Rational(1, 2)).str();
    if (static_cast<int>(ds.size()) > digits) {
      ++e;
    } else if (static_cast<int>(ds.size()) < digits) {
      --e;
    } else {
      break;
    }
  }
  while (ds.size() > 1 && ds.back() == '0') ds.pop_back();
  std::string out = ds.substr(0, 1);
  if (ds.size() > 1) out += "." + ds.substr(1);
  return out + "e" + std::to_string(e);
}

enum class FamilyKind { rigid, perturbed, staged };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::rigid: return "rigid";
    case FamilyKind::perturbed: return "perturbed";
    case FamilyKind::staged: return "staged";
  }
  return "?";
}

inline FamilyKind family_kind_from_string(const std::string& s) {
  if (s == "rigid") return FamilyKind::rigid;
  if (s == "perturbed") return FamilyKind::perturbed;
  if (s == "staged") return FamilyKind::staged;
  throw InvalidArgument("unknown Hamiltonian family '" + s + "'");
}

struct FamilySpec {
  FamilyKind kind = FamilyKind::rigid;
  double epsilon = 0.01;
  ModeSpec mode;
  std::vector<ModeSpec> generators;

  Hamiltonian build(double alpha_hat) const {
    switch (kind) {
      case FamilyKind::rigid: return Hamiltonian::rigid(alpha_hat);
      case FamilyKind::perturbed: return Hamiltonian::perturbed(alpha_hat, epsilon, mode);
      case FamilyKind::staged: return Hamiltonian::staged(alpha_hat, generators);
    }
    throw InvalidArgument("unknown family");
  }
};

struct RigidityConfig {
  ContinuedFraction alpha;
  long J = 1;
  SelectionPolicy policy = SelectionPolicy::prefer_direct;
  FamilySpec family;

  double probe_h = 0.05;
  FlowConfig flow = [] {
    FlowConfig f;
    f.step = 0.01;
    return f;
  }();
  long flow_n_max = 4096;

  bool floer = true;
  long floer_n_max = 16;
  double floer_frac_min = 1e-3;
  int floer_Ns = 128;
  int floer_nt_per_unit = 64;
  FloerConfig floer_cfg;

  int sobolev_trials = 100;
  std::vector<long> sobolev_periods = {1, 4, 16};
  std::uint64_t seed = 0;

  int hessian_nt = 32;
  int hessian_nr = 32;
  int hessian_ntheta = 64;
};

struct FloerRowData {
  bool converged = false;
  double residual = 0;
  double l2_s_derivative = 0;
  double energy_target = 0;
  double S = 0;
  bool S_capped = false;
  double A = 0;                 // sup |∂ₛz|
  InterpolationCheck interpolation;
  double step1_rhs = 0;         // M {nα}^{1/4}
  GronwallSweep gronwall;
};

struct RigidityRow {
  long j = 0;
  Integer n;
  long index = 0;
  bool complement = false;
  RationalInterval frac;                 // {nα}
  std::optional<C0Measurement> flow;
  std::optional<RationalInterval> certified_d;   // rigid family: 2|sin(π{nα})| for the exact α
  std::optional<FloerRowData> floer;
  std::optional<BoundValue> bound;
  double M = 0;
  double B = 0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
};

struct RigidityReport {
  FamilyKind family = FamilyKind::rigid;
  double alpha_hat = 0;
  RationalInterval alpha;
  std::vector<RigidityRow> rows;
  bool sequence_complete = true;
  std::string sequence_explanation;
  HessianBound B;
  std::optional<SobolevTable> sobolev;
  double c = 0;
  double probe_covering_radius = 0;

  std::string csv() const {
    csv::Writer w({"j", "n", "frac_lo", "frac_hi", "measured_d", "bound", "M", "B", "flags"});
    for (const auto& r : rows) {
      std::string flags;
      for (const auto& f : r.flags) flags += (flags.empty() ? "" : "|") + f;
      w.row({std::to_string(r.j), r.n.str(), format_scientific(r.frac.lo), format_scientific(r.frac.hi),
             r.flow ? csv::format_double(r.flow->measured) : "",
             r.bound ? csv::format_double(r.bound->value) : "", r.bound ? csv::format_double(r.M) : "",
             csv::format_double(r.B), flags});
    }
    return w.str();
  }

  // n against measured distance and bound, base-10 logs, for plotting.
  std::string plot_data() const {
    csv::Writer w({"n", "log10_measured_d", "log10_bound", "log10_certified_d_hi"});
    const double ln10 = std::log(10.0);
    for (const auto& r : rows) {
      w.row({r.n.str(),
             r.flow && r.flow->measured > 0 ? csv::format_double(std::log10(r.flow->measured)) : "",
             r.bound ? csv::format_double(r.bound->log_value / ln10) : "",
             r.certified_d && r.certified_d->hi > 0 ? csv::format_double(log_abs(r.certified_d->hi) / ln10) : ""});
    }
    return w.str();
  }

  std::string text() const {
    std::ostringstream o;
    o << "family " << to_string(family) << ", alpha_hat " << csv::format_double(alpha_hat) << "\n";
    o << "alpha in [" << format_scientific(alpha.lo, 20) << ", " << format_scientific(alpha.hi, 20) << "]\n";
    o << "rigidity sequence: " << sequence_explanation << "\n";
    o << "B = " << csv::format_double(B.B) << " (grid max " << csv::format_double(B.grid_max)
      << " + Lipschitz inflation; empirical)\n";
    if (sobolev)
      o << "c = " << csv::format_double(c) << " (1.5 x max interpolation ratio "
        << csv::format_double(sobolev->max_ratio) << " over " << sobolev->rows.size()
        << " periods; empirical)\n";
    o << "probe covering radius " << csv::format_double(probe_covering_radius) << "\n";
    for (const auto& r : rows) {
      o << "\nj = " << r.j << ", n = " << r.n.str() << (r.complement ? " (inverse map)" : "") << "\n";
      o << "  {n alpha} in [" << format_scientific(r.frac.lo, 6) << ", " << format_scientific(r.frac.hi, 6) << "]\n";
      if (r.flow)
        o << "  measured d = " << csv::format_double(r.flow->measured) << "; Lipschitz inflation "
          << (std::isfinite(r.flow->inflation) ? csv::format_double(r.flow->inflation)
                                               : "exp(" + csv::format_double(r.flow->log_inflation) + ")")
          << " (separate, often vacuous)\n";
      if (r.certified_d)
        o << "  certified d for the exact rotation in [" << format_scientific(r.certified_d->lo, 6) << ", "
          << format_scientific(r.certified_d->hi, 6) << "]\n";
      if (r.floer) {
        const auto& f = *r.floer;
        o << "  floer: converged " << (f.converged ? "yes" : "no") << ", residual "
          << csv::format_double(f.residual) << ", |d_s z|^2 " << csv::format_double(f.l2_s_derivative)
          << " vs pi{n alpha} " << csv::format_double(f.energy_target) << ", S " << csv::format_double(f.S)
          << (f.S_capped ? " (capped)" : "") << "\n";
        o << "  A = " << csv::format_double(f.A) << " <= M{n alpha}^(1/4) = " << csv::format_double(f.step1_rhs)
          << ", b = " << csv::format_double(f.interpolation.b) << " (empirical)\n";
        o << "  gronwall: " << f.gronwall.violations << " violations over " << f.gronwall.nodes
          << " nodes, max lhs/rhs " << csv::format_double(f.gronwall.max_ratio) << "\n";
      }
      if (r.bound)
        o << "  bound M{n alpha}^(1/4) n e^(Bn) = " << csv::format_double(r.bound->value)
          << (r.bound->vacuous ? " (vacuous, exceeds 2)" : "") << "\n";
      else
        o << "  bound unavailable\n";
      std::string flags;
      for (const auto& fl : r.flags) flags += (flags.empty() ? "" : ", ") + fl;
      o << "  flags: " << flags << "\n";
    }
    return o.str();
  }
};

// Target for φ⁻¹ on a complement entry: rotation number −α, degree ⌊−nα⌋ = −⌊nα⌋ − 1,
// fractional part 1 − {nα}.
inline FloerTarget complement_floer_target(const RigidityEntry& e, const RationalInterval& alpha) {
  FloerTarget t;
  t.n = e.n.convert_to<long>();
  t.degree = -floor(alpha.lo * Rational(e.n)).convert_to<long>() - 1;
  t.frac_lo = to_double(e.small.lo);
  t.frac_hi = to_double(e.small.hi);
  t.frac = {e.n, e.small.lo, e.small.hi, false};
  return t;
}

inline RigidityReport run_rigidity_experiment(const RigidityConfig& cfg) {
  if (cfg.J < 0) throw InvalidArgument("J must be >= 0");
  if (cfg.flow_n_max < 0 || cfg.floer_n_max < 0) throw InvalidArgument("n limits must be >= 0");
  RigidityReport rep;
  rep.family = cfg.family.kind;
  const ValueEnclosure av = value_enclosure(cfg.alpha);
  rep.alpha = av.range;
  rep.alpha_hat = to_double((av.range.lo + av.range.hi) / 2);
  const Hamiltonian H = cfg.family.build(rep.alpha_hat);
  rep.B = hessian_bound(H, cfg.hessian_nt, cfg.hessian_nr, cfg.hessian_ntheta);

  RigiditySequence seq = rigidity_sequence(cfg.alpha, cfg.J, cfg.policy);
  rep.sequence_complete = seq.complete;
  rep.sequence_explanation = seq.explanation.empty() ? "empty" : seq.explanation;
  if (seq.entries.empty()) return rep;

  const ProbeGrid grid = ProbeGrid::polar(cfg.probe_h);
  rep.probe_covering_radius = grid.covering_radius;
  std::vector<long> flow_ns;
  for (const auto& e : seq.entries)
    if (e.n <= cfg.flow_n_max) flow_ns.push_back(e.n.convert_to<long>());
  std::vector<C0Measurement> flows;
  if (!flow_ns.empty()) flows = c0_distances(H, flow_ns, grid, rep.B.B, cfg.flow);

  bool any_floer = false;
  for (const auto& e : seq.entries)
    any_floer = any_floer || (cfg.floer && e.n <= cfg.floer_n_max && to_double(e.small.lo) >= cfg.floer_frac_min);
  if (any_floer) {
    rep.sobolev = estimate_sobolev_constant(SobolevDomain::half_cylinder, cfg.sobolev_periods,
                                            cfg.sobolev_trials, cfg.seed);
    rep.c = rep.sobolev->c;
  }

  for (const auto& e : seq.entries) {
    RigidityRow row;
    row.j = e.j;
    row.n = e.n;
    row.index = e.index;
    row.complement = e.complement;
    row.frac = e.frac;
    row.B = rep.B.B;
    row.flags.push_back("B_empirical");
    if (e.complement) row.flags.push_back("complement");
    if (e.n <= cfg.flow_n_max) {
      const long n = e.n.convert_to<long>();
      for (const auto& m : flows)
        if (m.n == n) row.flow = m;
    } else {
      row.flags.push_back("flow_infeasible");
    }
    if (cfg.family.kind == FamilyKind::rigid) {
      row.certified_d = chord_enclosure(e.frac);
      row.flags.push_back("certified_d");
    }

    const bool feasible = cfg.floer && e.n <= cfg.floer_n_max && to_double(e.small.lo) >= cfg.floer_frac_min;
    if (feasible) {
      const FloerTarget t2 = e.complement ? complement_floer_target(e, rep.alpha)
                                          : floer_target(cfg.alpha, e.n.convert_to<long>());
      const Hamiltonian Hf = e.complement ? H.inverse() : H;
      const Truncation tr = choose_truncation(t2, cfg.floer_cfg.tail_tol, cfg.floer_cfg.S_max);
      CylinderGrid cg;
      cg.n = t2.n;
      cg.S = tr.S;
      cg.Ns = cfg.floer_Ns;
      cg.Nt = static_cast<int>(t2.n * cfg.floer_nt_per_unit);
      if (cg.Nt % 2) ++cg.Nt;
      const FloerSolution sol = solve_floer(Hf, t2, cg, std::nullopt, cfg.floer_cfg);
      FloerRowData f;
      f.converged = sol.converged;
      f.residual = sol.residual_norm;
      f.l2_s_derivative = l2_s_derivative(sol);
      f.energy_target = t2.energy_target();
      f.S = tr.S;
      f.S_capped = tr.capped;
      f.A = sup_norm_s_derivative(sol);
      f.interpolation = interpolation_bound_check(sol, rep.c);
      row.M = f.interpolation.M;
      f.step1_rhs = row.M * std::pow(t2.frac_hi, 0.25);
      f.gronwall = gronwall_sweep(Hf, sol, rep.B.B, cfg.flow);
      row.bound = theoretical_bound(row.M, row.B, e.small, e.n);
      row.flags.push_back("c_empirical");
      row.flags.push_back("b_empirical");
      if (!f.converged) row.flags.push_back("solver_not_converged");
      if (f.S_capped) row.flags.push_back("truncation_capped");
      if (f.gronwall.violations > 0) row.flags.push_back("gronwall_violation");
      if (row.bound->vacuous) row.flags.push_back("bound_vacuous");
      row.floer = f;
    } else {
      row.flags.push_back("flow_only");
      row.flags.push_back("bound_unavailable");
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace pseudorot
