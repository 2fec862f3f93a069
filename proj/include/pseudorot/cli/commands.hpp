#pragma once

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pseudorot/analysis/gronwall.hpp"
#include "pseudorot/cli/config.hpp"
#include "pseudorot/cli/manifest.hpp"
#include "pseudorot/floer/io.hpp"

namespace pseudorot::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;   // ran to completion, some stage invariant failed
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitFailure = 4;

struct Context {
  ExperimentConfig config;
  OutputDir* out = nullptr;
  std::ostream* log = &std::cout;
};

// Runs `body` as a named stage, recording its time and outcome in the manifest.
template <class F>
bool run_stage(Context& ctx, const std::string& name, F&& body) {
  Stopwatch sw;
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (...) {
    ctx.out->stage({name, sw.seconds(), false, "exception"});
    throw;
  }
  ctx.out->stage({name, sw.seconds(), ok, detail});
  return ok;
}

inline std::vector<long> parse_long_list(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size()) throw InvalidArgument("not an integer list: " + s);
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
}

inline Vec2 parse_point(const std::string& s) {
  const auto c = s.find(',');
  if (c == std::string::npos) throw InvalidArgument("point must be x,y");
  return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
}

inline Hamiltonian build_hamiltonian(const ExperimentConfig& c, const ContinuedFraction& cf) {
  const ValueEnclosure v = value_enclosure(cf);
  return c.family.build(to_double((v.range.lo + v.range.hi) / 2));
}

// ---------------------------------------------------------------------------
// alpha
// ---------------------------------------------------------------------------

// `seed` is "a0,a1,...,am".
inline bool cmd_alpha_construct(Context& ctx, const std::string& seed, long depth) {
  return run_stage(ctx, "alpha construct", [&](std::string& detail) {
    const std::vector<long> s = parse_long_list(seed);
    std::vector<Integer> q;
    for (std::size_t i = 1; i < s.size(); ++i) q.push_back(Integer(s[i]));
    LStarOptions opt;
    opt.bit_budget = ctx.config.alpha.bit_budget;
    const ContinuedFraction cf = construct_lstar(depth, Integer(s[0]), q, opt);
    ctx.out->write("cf.json", pseudorot::to_json(cf).dump(2) + "\n", "json:continued_fraction");
    *ctx.log << "a0 = " << cf.a0 << "\n";
    for (std::size_t i = 0; i < cf.quotients.size(); ++i) {
      const std::string a = cf.quotients[i].str();
      *ctx.log << "a" << i + 1 << " = " << (a.size() > 60 ? a.substr(0, 20) + "... (" + std::to_string(a.size()) + " digits)" : a) << "\n";
    }
    detail = "depth " + std::to_string(cf.depth());
    return true;
  });
}

inline bool cmd_alpha_witness(Context& ctx, long k) {
  return run_stage(ctx, "alpha witness", [&](std::string& detail) {
    const ContinuedFraction cf = ctx.config.alpha.build();
    const WitnessResult w = verify_lstar_witness(cf, k, ctx.config.alpha.bit_budget);
    ctx.out->write("witness.json", pseudorot::to_json(w).dump(2) + "\n", "json:lstar_witness");
    *ctx.log << "k = " << k << ": " << to_string(w.status) << " (" << w.explanation << ")\n";
    detail = to_string(w.status);
    return true;
  });
}

inline bool cmd_alpha_sequence(Context& ctx, long J) {
  return run_stage(ctx, "alpha sequence", [&](std::string& detail) {
    const ContinuedFraction cf = ctx.config.alpha.build();
    const RigiditySequence s = rigidity_sequence(cf, J, parse_selection_policy(ctx.config.rigidity.policy));
    ctx.out->write("sequence.json", pseudorot::to_json(s).dump(2) + "\n", "json:rigidity_sequence");
    for (const auto& e : s.entries)
      *ctx.log << "j = " << e.j << ": n = " << e.n << (e.complement ? " (complement)" : "") << "\n";
    if (!s.complete) *ctx.log << "incomplete: " << s.explanation << "\n";
    detail = s.complete ? "complete" : s.explanation;
    return s.complete;
  });
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

inline bool cmd_flow(Context& ctx, std::optional<std::vector<long>> ns, std::optional<Vec2> trajectory_from,
                     double trajectory_time) {
  return run_stage(ctx, "flow", [&](std::string& detail) {
    const ExperimentConfig& c = ctx.config;
    const ContinuedFraction cf = c.alpha.build();
    const Hamiltonian H = build_hamiltonian(c, cf);
    const HessianBound B = hessian_bound(H, c.rigidity.hessian_nt, c.rigidity.hessian_nr, c.rigidity.hessian_ntheta);
    const ProbeGrid grid = ProbeGrid::polar(c.flow.probe_h);
    const std::vector<long> list = ns ? *ns : c.flow.n;
    const auto ms = c0_distances(H, list, grid, B.B, c.flow.config());
    csv::Writer w({"n", "measured_d", "argmax_x", "argmax_y", "log_inflation"});
    for (const auto& m : ms)
      w.row({std::to_string(m.n), csv::format_double(m.measured), csv::format_double(m.argmax.x()),
             csv::format_double(m.argmax.y()), csv::format_double(m.log_inflation)});
    ctx.out->write("flow.csv", w.str(), csv_schema(w.str()));
    const RotationEstimate rot = boundary_rotation_number(H, 64, c.flow.config());
    Json s;
    s["type"] = "flow_summary";
    s["family"] = to_string(c.family.kind);
    s["B"] = B.B;
    s["B_grid_max"] = B.grid_max;
    s["probe_points"] = grid.points.size();
    s["covering_radius"] = grid.covering_radius;
    s["rotation_number"] = rot.value;
    s["rotation_error_band"] = rot.error_band;
    ctx.out->write("flow_summary.json", s.dump(2) + "\n", "json:flow_summary");
    for (const auto& m : ms) *ctx.log << "n = " << m.n << ": d = " << csv::format_double(m.measured) << "\n";
    if (trajectory_from) {
      const Trajectory tr = flow(H, *trajectory_from, 0.0, trajectory_time, c.flow.config());
      const std::string t = trajectory_csv(tr);
      ctx.out->write("trajectory.csv", t, csv_schema(t));
    }
    detail = std::to_string(ms.size()) + " iterates";
    return true;
  });
}

// ---------------------------------------------------------------------------
// floer
// ---------------------------------------------------------------------------

inline bool cmd_floer(Context& ctx, long n) {
  return run_stage(ctx, "floer n=" + std::to_string(n), [&](std::string& detail) {
    const ExperimentConfig& c = ctx.config;
    const ContinuedFraction cf = c.alpha.build();
    const RigiditySequence seq = rigidity_sequence(cf, c.rigidity.J, parse_selection_policy(c.rigidity.policy));
    const RigidityEntry* entry = nullptr;
    for (const auto& e : seq.entries)
      if (e.n == n) entry = &e;
    if (!entry) throw ConfigError({"floer.n: n = " + std::to_string(n) + " is not in the rigidity sequence given by alpha and rigidity.J"});
    const Hamiltonian H0 = build_hamiltonian(c, cf);
    const FloerTarget tg = entry->complement ? complement_floer_target(*entry, value_enclosure(cf).range) : floer_target(cf, n);
    const Hamiltonian H = entry->complement ? H0.inverse() : H0;
    const Truncation tr = choose_truncation(tg, c.floer.tail_tol, c.floer.S_max);
    CylinderGrid g;
    g.n = tg.n;
    g.S = tr.S;
    g.Ns = c.floer.Ns;
    g.Nt = static_cast<int>(tg.n * c.floer.nt_per_unit);
    if (g.Nt % 2) ++g.Nt;
    const FloerSolution sol = solve_floer(H, tg, g, std::nullopt, c.floer.config());
    const HessianBound B = hessian_bound(H, c.rigidity.hessian_nt, c.rigidity.hessian_nr, c.rigidity.hessian_ntheta);
    const GronwallSweep gw = gronwall_sweep(H, sol, B.B, c.flow.config());
    const EnergyReport er = energy_report(sol, H, tg);
    const std::string base = "floer_n" + std::to_string(n);
    const std::string csvs = solution_csv(sol);
    ctx.out->write(base + ".csv", csvs, csv_schema(csvs));
    ctx.out->write(base + ".bin", encode_grid_dump(sol), "grid_dump");
    Json s;
    s["type"] = "floer_summary";
    s["n"] = n;
    s["degree"] = sol.degree;
    s["complement"] = entry->complement;
    s["frac_lo"] = tg.frac_lo;
    s["frac_hi"] = tg.frac_hi;
    s["S"] = tr.S;
    s["S_capped"] = tr.capped;
    s["Ns"] = g.Ns;
    s["Nt"] = g.Nt;
    s["converged"] = sol.converged;
    s["iterations"] = sol.iterations;
    s["residual"] = sol.residual_norm;
    s["diagnostic"] = sol.diagnostic;
    s["l2_s_derivative"] = er.l2_s_derivative;
    s["energy_target"] = tg.energy_target();
    s["relative_error"] = er.relative_error;
    s["floer_energy"] = er.floer_energy;
    s["e_omega"] = er.e_omega;
    s["boundary_winding"] = boundary_winding(sol);
    s["A"] = gw.A;
    s["B"] = gw.B;
    s["gronwall_nodes"] = gw.nodes;
    s["gronwall_violations"] = gw.violations;
    s["gronwall_max_ratio"] = gw.max_ratio;
    ctx.out->write(base + ".json", s.dump(2) + "\n", "json:floer_summary");
    *ctx.log << "n = " << n << ": converged " << (sol.converged ? "yes" : "no") << ", residual "
             << csv::format_double(sol.residual_norm) << ", |d_s z|^2 " << csv::format_double(er.l2_s_derivative)
             << " vs " << csv::format_double(tg.energy_target()) << ", gronwall violations " << gw.violations << "\n";
    detail = sol.converged ? "converged" : "not converged: " + sol.diagnostic;
    return sol.converged && gw.violations == 0;
  });
}

// ---------------------------------------------------------------------------
// rigidity
// ---------------------------------------------------------------------------

inline bool cmd_rigidity_run(Context& ctx) {
  return run_stage(ctx, "rigidity run", [&](std::string& detail) {
    const RigidityReport rep = run_rigidity_experiment(ctx.config.rigidity_config(ctx.config.alpha.build()));
    const std::string c = rep.csv(), p = rep.plot_data();
    ctx.out->write("rigidity.csv", c, csv_schema(c));
    ctx.out->write("rigidity.txt", rep.text(), "text");
    ctx.out->write("rigidity_plot.csv", p, csv_schema(p));
    if (rep.sobolev) {
      const std::string s = rep.sobolev->csv();
      ctx.out->write("rigidity_sobolev.csv", s, csv_schema(s));
    }
    *ctx.log << rep.text();
    bool ok = rep.sequence_complete;
    for (const auto& r : rep.rows) ok = ok && !r.has_flag("solver_not_converged") && !r.has_flag("gronwall_violation");
    detail = std::to_string(rep.rows.size()) + " rows";
    return ok;
  });
}

inline bool cmd_rigidity_mixing(Context& ctx, std::optional<std::vector<long>> ns) {
  return run_stage(ctx, "rigidity mixing", [&](std::string& detail) {
    const ExperimentConfig& c = ctx.config;
    const ContinuedFraction cf = c.alpha.build();
    const Hamiltonian H = build_hamiltonian(c, cf);
    std::vector<long> list = ns ? *ns : c.mixing.n;
    if (list.empty()) {
      const RigiditySequence seq = rigidity_sequence(cf, c.rigidity.J, parse_selection_policy(c.rigidity.policy));
      for (const auto& e : seq.entries)
        if (e.n <= c.rigidity.flow_n_max) list.push_back(e.n.convert_to<long>());
    }
    const MixingProbe p = mixing_probe(H, DiskRegion{c.mixing.A}, DiskRegion{c.mixing.B}, list, c.mixing_config());
    const std::string t = p.csv();
    ctx.out->write("mixing.csv", t, csv_schema(t));
    Json s;
    s["type"] = "mixing_summary";
    s["mu_A"] = p.mu_A;
    s["mu_B"] = p.mu_B;
    s["mu_A_mu_B"] = p.product;
    s["separation"] = p.separation;
    s["validation_error"] = p.validation_error;
    s["seed"] = p.seed;
    ctx.out->write("mixing.json", s.dump(2) + "\n", "json:mixing_summary");
    for (const auto& r : p.rows)
      *ctx.log << "n = " << r.n << ": " << r.hits << "/" << r.samples << " hits, estimate "
               << csv::format_double(r.estimate) << " (mu(A)mu(B) = " << csv::format_double(p.product) << ")\n";
    detail = std::to_string(p.rows.size()) + " times, separation " + csv::format_double(p.separation);
    return true;
  });
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

inline bool cmd_verify_sobolev(Context& ctx, std::optional<std::vector<long>> ns, std::optional<long> trials,
                               std::optional<std::string> domain) {
  return run_stage(ctx, "verify sobolev", [&](std::string& detail) {
    const ExperimentConfig& c = ctx.config;
    const SobolevDomain d = sobolev_domain_from_string(domain ? *domain : c.sobolev.domain);
    const long t = trials ? *trials : c.sobolev.trials;
    if (t < 1) throw InvalidArgument("trials must be >= 1");
    const SobolevTable tab = estimate_sobolev_constant(d, ns ? *ns : c.sobolev.periods, static_cast<int>(t), c.seed);
    const std::string s = tab.csv();
    ctx.out->write("sobolev.csv", s, csv_schema(s));
    *ctx.log << s << "max ratio " << csv::format_double(tab.max_ratio) << " (bound " << csv::format_double(tab.bound)
             << "), spread " << csv::format_double(tab.spread) << "\n";
    detail = "max " + csv::format_double(tab.max_ratio) + ", spread " + csv::format_double(tab.spread);
    return tab.all_within_bound && tab.period_independent;
  });
}

// `input` is a CSV with columns t, x.
inline bool cmd_verify_gronwall(Context& ctx, const std::string& input, double a, double b) {
  return run_stage(ctx, "verify gronwall", [&](std::string& detail) {
    const csv::Table t = csv::parse(read_file(input));
    if (t.header != std::vector<std::string>{"t", "x"}) throw InvalidArgument("gronwall input needs columns t,x");
    GronwallInstance g;
    g.a = a;
    g.b = b;
    for (const auto& r : t.rows) {
      g.t.push_back(std::stod(r[0]));
      g.x.push_back(std::stod(r[1]));
    }
    const GronwallReport rep = gronwall_check(g);
    Json s;
    s["type"] = "gronwall_report";
    s["verdict"] = to_string(rep.verdict);
    s["samples"] = g.t.size();
    s["hypothesis_holds"] = rep.hypothesis_holds;
    s["conclusion_holds"] = rep.conclusion_holds;
    if (!rep.hypothesis_holds) s["first_hypothesis_violation_time"] = rep.first_hypothesis_violation_time;
    s["min_slack"] = rep.min_slack;
    s["min_relative_slack"] = rep.min_relative_slack;
    ctx.out->write("gronwall.json", s.dump(2) + "\n", "json:gronwall_report");
    *ctx.log << "gronwall: " << to_string(rep.verdict) << "\n";
    detail = to_string(rep.verdict);
    return rep.verdict == GronwallVerdict::holds;
  });
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

// Re-checks every file listed in the manifest of `dir` and writes report.txt.
inline bool cmd_report(const std::string& dir, std::ostream& log) {
  const std::string mp = (std::filesystem::path(dir) / "manifest.json").string();
  const RunManifest m = RunManifest::from_json(Json::parse(read_file(mp)));
  OutputDir out(dir, m.config_hash, "report");
  std::ostringstream r;
  r << "config " << m.config_hash << "\n";
  bool ok = true;
  for (const auto& s : m.stages) {
    r << "stage " << s.name << ": " << (s.ok ? "ok" : "FAILED") << ", " << csv::format_double(s.seconds) << " s";
    if (!s.detail.empty()) r << " (" << s.detail << ")";
    r << "\n";
    ok = ok && s.ok;
  }
  for (const auto& f : m.files) {
    if (f.path == "report.txt") continue;
    const std::string problem = check_file(dir, f);
    r << "file " << f.path << ": " << (problem.empty() ? "ok" : problem) << "\n";
    ok = ok && problem.empty();
  }
  r << (ok ? "all stages and files ok\n" : "problems found\n");
  out.write("report.txt", r.str(), "text");
  out.stage({"report", 0, ok, ok ? "" : "problems found"});
  out.save();
  log << r.str();
  return ok;
}

}  // namespace pseudorot::cli
