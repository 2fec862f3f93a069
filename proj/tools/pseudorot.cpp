// pseudorot: command-line driver for the experiments.
//
//   pseudorot [--config FILE] [--out-dir DIR] [--seed N] [--threads N] <command> ...
//
// Exit status: 0 success, 1 a stage invariant failed, 2 usage error, 3 config error,
// 4 runtime failure. Failures also leave error.json in the output directory.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "pseudorot/cli/commands.hpp"

using namespace pseudorot;
using namespace pseudorot::cli;

namespace {

void write_error(const std::string& dir, const std::string& stage, const std::string& kind,
                 const std::string& message, const std::vector<std::string>& violations = {}) {
  Json e;
  e["type"] = "error";
  e["stage"] = stage;
  e["kind"] = kind;
  e["message"] = message;
  e["violations"] = violations;
  try {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / "error.json").string(), e.dump(2) + "\n");
  } catch (const std::exception&) {
  }
  std::cerr << "error (" << kind << "): " << message << "\n";
  for (const auto& v : violations) std::cerr << "  " << v << "\n";
}

std::optional<std::vector<long>> list_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_long_list(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on rigidity of irrational pseudo-rotations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(PSEUDOROT_VERSION));

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "output directory (default: config out_dir)");
  app.add_option("--seed", seed, "Monte Carlo seed, overrides the config");
  app.add_option("--threads", threads, "worker threads, overrides PSEUDOROT_THREADS")->check(CLI::PositiveNumber);

  // alpha
  auto* alpha = app.add_subcommand("alpha", "continued fractions in L*")->require_subcommand(1);
  std::string a_seed = "0,3";
  long a_depth = 3, a_k = 1, a_J = 1;
  auto* a_construct = alpha->add_subcommand("construct", "extend a seed by a_{m+1} = ceil(e^{m q_m})");
  a_construct->add_option("--seed", a_seed, "a0,a1,...,am")->capture_default_str();
  a_construct->add_option("--depth", a_depth, "index of the last stored quotient")->capture_default_str()->check(CLI::NonNegativeNumber);
  auto* a_witness = alpha->add_subcommand("witness", "certify |alpha - p/q| < e^{-kq} for the config alpha");
  a_witness->add_option("--k", a_k, "exponent multiplier")->capture_default_str()->check(CLI::NonNegativeNumber);
  auto* a_sequence = alpha->add_subcommand("sequence", "rigidity times n_j for the config alpha");
  a_sequence->add_option("--J", a_J, "number of terms")->capture_default_str()->check(CLI::NonNegativeNumber);

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "C0 distance of iterates to the identity on the probe grid");
  std::string flow_n, traj_from;
  double traj_time = 1;
  flow_cmd->add_option("--n", flow_n, "iterate counts, comma separated (default: config flow.n)");
  flow_cmd->add_option("--trajectory", traj_from, "also export the trajectory from x,y");
  flow_cmd->add_option("--time", traj_time, "trajectory length")->capture_default_str()->check(CLI::PositiveNumber);

  // floer
  auto* floer_cmd = app.add_subcommand("floer", "solve the Floer equation for n from the rigidity sequence");
  std::string floer_n;
  floer_cmd->add_option("--n", floer_n, "n values, comma separated (default: config floer.n)");

  // rigidity
  auto* rig = app.add_subcommand("rigidity", "rigidity experiment")->require_subcommand(1);
  auto* rig_run = rig->add_subcommand("run", "measured distance against the bound along the rigidity sequence");
  auto* rig_mix = rig->add_subcommand("mixing", "Monte Carlo mixing probe along rigidity times");
  std::string mix_n;
  rig_mix->add_option("--n", mix_n, "iterate counts (default: config mixing.n or the rigidity sequence)");

  // verify
  auto* ver = app.add_subcommand("verify", "analysis checks")->require_subcommand(1);
  auto* v_sob = ver->add_subcommand("sobolev", "interpolation constant on random probes");
  std::string sob_n, sob_domain;
  std::optional<long> sob_trials;
  v_sob->add_option("--n", sob_n, "periods, comma separated");
  v_sob->add_option("--trials", sob_trials, "probes per period")->check(CLI::PositiveNumber);
  v_sob->add_option("--domain", sob_domain, "plane, half-plane, cylinder or half-cylinder");
  auto* v_gw = ver->add_subcommand("gronwall", "check x <= a + b int x implies x <= a e^{bt}");
  std::string gw_input;
  double gw_a = 0, gw_b = 0;
  v_gw->add_option("--input", gw_input, "CSV with columns t,x")->required()->check(CLI::ExistingFile);
  v_gw->add_option("--a", gw_a, "constant a")->required()->check(CLI::NonNegativeNumber);
  v_gw->add_option("--b", gw_b, "constant b")->required()->check(CLI::NonNegativeNumber);

  // report
  auto* report = app.add_subcommand("report", "re-check the manifest of the output directory");

  for (auto* s : {alpha, a_construct, a_witness, a_sequence, flow_cmd, floer_cmd, rig, rig_run, rig_mix, ver, v_sob, v_gw, report})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::string stage = "config";
  std::string dir = out_dir.empty() ? "out" : out_dir;
  try {
    Context ctx;
    if (!config_path.empty()) ctx.config = parse_config(config_path);
    if (!out_dir.empty()) ctx.config.out_dir = out_dir;
    if (seed) ctx.config.seed = *seed;
    if (threads) set_thread_count(*threads);
    dir = ctx.config.out_dir;

    if (report->parsed()) {
      stage = "report";
      return cmd_report(dir, std::cout) ? kExitOk : kExitInvariant;
    }

    std::string command;
    for (int i = 1; i < argc; ++i) command += (i > 1 ? " " : "") + std::string(argv[i]);
    OutputDir out(dir, sha256_hex(canonical_text(ctx.config)), command);
    out.write("config.json", canonical_text(ctx.config), "json:experiment_config");
    ctx.out = &out;

    bool ok = true;
    try {
      if (a_construct->parsed()) {
        stage = "alpha construct";
        ok = cmd_alpha_construct(ctx, a_seed, a_depth);
      } else if (a_witness->parsed()) {
        stage = "alpha witness";
        ok = cmd_alpha_witness(ctx, a_k);
      } else if (a_sequence->parsed()) {
        stage = "alpha sequence";
        ok = cmd_alpha_sequence(ctx, a_J);
      } else if (flow_cmd->parsed()) {
        stage = "flow";
        std::optional<Vec2> from;
        if (!traj_from.empty()) from = parse_point(traj_from);
        ok = cmd_flow(ctx, list_opt(flow_n), from, traj_time);
      } else if (floer_cmd->parsed()) {
        stage = "floer";
        std::vector<long> ns = floer_n.empty() ? ctx.config.floer.n : parse_long_list(floer_n);
        if (ns.empty()) throw ConfigError({"floer.n: no n given (use --n or floer.n in the config)"});
        for (long n : ns) ok = cmd_floer(ctx, n) && ok;
      } else if (rig_run->parsed()) {
        stage = "rigidity run";
        ok = cmd_rigidity_run(ctx);
      } else if (rig_mix->parsed()) {
        stage = "rigidity mixing";
        ok = cmd_rigidity_mixing(ctx, list_opt(mix_n));
      } else if (v_sob->parsed()) {
        stage = "verify sobolev";
        ok = cmd_verify_sobolev(ctx, list_opt(sob_n), sob_trials, sob_domain.empty() ? std::nullopt : std::optional(sob_domain));
      } else if (v_gw->parsed()) {
        stage = "verify gronwall";
        ok = cmd_verify_gronwall(ctx, gw_input, gw_a, gw_b);
      }
    } catch (...) {
      out.save();
      throw;
    }
    out.save();
    if (!ok) {
      write_error(dir, stage, "invariant_failed", "a stage invariant failed; see manifest.json");
      return kExitInvariant;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    write_error(dir, stage, e.kind(), e.what(), e.violations());
    return kExitConfig;
  } catch (const Error& e) {
    write_error(dir, stage, e.kind(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    write_error(dir, stage, "internal", e.what());
    return kExitFailure;
  }
}
