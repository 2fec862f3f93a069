#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pseudorot/diophantine/serialize.hpp"
#include "pseudorot/rigidity/experiment.hpp"
#include "pseudorot/rigidity/mixing.hpp"

namespace pseudorot::cli {

struct AlphaSpec {
  enum class Kind { lstar, explicit_cf };
  Kind kind = Kind::lstar;
  Integer a0 = 0;
  std::vector<Integer> seed{Integer(3)};
  long depth = 3;
  std::uint64_t bit_budget = kDefaultBitBudget;
  ContinuedFraction cf;   // explicit_cf only

  ContinuedFraction build() const {
    if (kind == Kind::explicit_cf) return cf;
    LStarOptions opt;
    opt.bit_budget = bit_budget;
    return construct_lstar(depth, a0, seed, opt);
  }
};

struct FlowSection {
  std::string method = "rk4";
  double step = 0.01;
  double rtol = 1e-10;
  double probe_h = 0.05;
  std::vector<long> n{1, 3, 64};

  FlowConfig config() const {
    FlowConfig f;
    f.method = method == "dopri5" ? Integrator::dopri5 : Integrator::rk4;
    f.step = step;
    f.rtol = rtol;
    return f;
  }
};

struct RigiditySection {
  long J = 1;
  std::string policy = "prefer_direct";
  long flow_n_max = 4096;
  bool floer = true;
  long floer_n_max = 16;
  double floer_frac_min = 1e-3;
  int hessian_nt = 32;
  int hessian_nr = 32;
  int hessian_ntheta = 64;
};

struct FloerSection {
  std::vector<long> n;   // solver n values; each must appear in the rigidity sequence
  int Ns = 128;
  int nt_per_unit = 64;
  int max_iterations = 40;
  double residual_tol = 1e-3;
  double tail_tol = 1e-4;
  double S_max = 2000;
  double penalty = 0.05;

  FloerConfig config() const {
    FloerConfig f;
    f.max_iterations = max_iterations;
    f.residual_tol = residual_tol;
    f.tail_tol = tail_tol;
    f.S_max = S_max;
    f.penalty = penalty;
    return f;
  }
};

struct SobolevSection {
  std::string domain = "half-cylinder";
  long trials = 100;
  std::vector<long> periods{1, 4, 16};
};

struct MixingSection {
  long samples = 100000;
  double step = 0.05;
  std::vector<long> n;   // empty: the rigidity sequence
  std::vector<AnnularSector> A{AnnularSector{0.2, 1.0, -kPi / 3, kPi / 3}};
  std::vector<AnnularSector> B{AnnularSector{0.2, 1.0, 2 * kPi / 3, 4 * kPi / 3}};
};

struct ExperimentConfig {
  AlphaSpec alpha;
  FamilySpec family;
  FlowSection flow;
  RigiditySection rigidity;
  FloerSection floer;
  SobolevSection sobolev;
  MixingSection mixing;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  RigidityConfig rigidity_config(const ContinuedFraction& cf) const {
    RigidityConfig r;
    r.alpha = cf;
    r.J = rigidity.J;
    r.policy = parse_selection_policy(rigidity.policy);
    r.family = family;
    r.probe_h = flow.probe_h;
    r.flow = flow.config();
    r.flow_n_max = rigidity.flow_n_max;
    r.floer = rigidity.floer;
    r.floer_n_max = rigidity.floer_n_max;
    r.floer_frac_min = rigidity.floer_frac_min;
    r.floer_Ns = floer.Ns;
    r.floer_nt_per_unit = floer.nt_per_unit;
    r.floer_cfg = floer.config();
    r.sobolev_trials = static_cast<int>(sobolev.trials);
    r.sobolev_periods = sobolev.periods;
    r.seed = seed;
    r.hessian_nt = rigidity.hessian_nt;
    r.hessian_nr = rigidity.hessian_nr;
    r.hessian_ntheta = rigidity.hessian_ntheta;
    return r;
  }

  MixingConfig mixing_config() const {
    MixingConfig m;
    m.samples = mixing.samples;
    m.seed = seed;
    m.flow = flow.config();
    m.flow.step = mixing.step;
    return m;
  }
};

namespace config_detail {

inline std::string decimal(double v) { return csv::format_double(v); }

inline Json sector_json(const AnnularSector& s) {
  return {{"r0", s.r0}, {"r1", s.r1}, {"theta0", s.theta0}, {"theta1", s.theta1}};
}

inline Json mode_json(const ModeSpec& m) {
  return {{"m", m.m}, {"p", m.p}, {"k", m.k}, {"phase", m.phase}, {"amplitude", m.amplitude}};
}

template <class T>
Json list(const std::vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x);
  return a;
}

// Walks a JSON object, recording every violation instead of stopping at the first.
class Reader {
 public:
  explicit Reader(std::vector<std::string>* errors) : errors_(errors) {}

  void fail(const std::string& path, const std::string& what) { errors_->push_back(path + ": " + what); }

  // Reports keys of `j` outside `known`.
  void keys(const Json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return;
    }
    std::set<std::string> k(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!k.count(it.key())) fail(path + "." + it.key(), "unknown field");
  }

  template <class T>
  void get(const Json& j, const char* key, const std::string& path, T& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const Json& v = j.at(key);
    const std::string p = path + "." + key;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) return fail(p, "expected a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) return fail(p, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned() || v.get<long long>() >= 0)
            out = v.get<T>();
          else
            fail(p, "expected a nonnegative integer");
        } else {
          out = v.get<T>();
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (v.is_number()) {
          out = v.get<T>();
        } else if (v.is_string()) {
          std::size_t used = 0;
          const std::string s = v.get<std::string>();
          out = std::stod(s, &used);
          if (used != s.size()) fail(p, "not a decimal number");
        } else {
          fail(p, "expected a number");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) return fail(p, "expected a string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, Integer>) {
        if (!v.is_string()) return fail(p, "expected a decimal string");
        out = parse_integer(v.get<std::string>());
      } else if constexpr (std::is_same_v<T, std::vector<long>>) {
        if (!v.is_array()) return fail(p, "expected an array of integers");
        out.clear();
        for (const auto& x : v) {
          if (!x.is_number_integer()) return fail(p, "expected an array of integers");
          out.push_back(x.get<long>());
        }
      } else if constexpr (std::is_same_v<T, std::vector<Integer>>) {
        if (!v.is_array()) return fail(p, "expected an array of decimal strings");
        out.clear();
        for (const auto& x : v) {
          if (!x.is_string()) return fail(p, "expected an array of decimal strings");
          out.push_back(parse_integer(x.get<std::string>()));
        }
      }
    } catch (const std::exception& e) {
      fail(p, e.what());
    }
  }

 private:
  std::vector<std::string>* errors_;
};

}  // namespace config_detail

inline Json to_json(const ExperimentConfig& c) {
  using namespace config_detail;
  Json j;
  j["type"] = "experiment_config";
  Json a;
  if (c.alpha.kind == AlphaSpec::Kind::lstar) {
    a["kind"] = "lstar";
    a["a0"] = to_string(c.alpha.a0);
    Json s = Json::array();
    for (const auto& q : c.alpha.seed) s.push_back(to_string(q));
    a["seed"] = s;
    a["depth"] = c.alpha.depth;
    a["bit_budget"] = c.alpha.bit_budget;
  } else {
    a["kind"] = "explicit";
    a["cf"] = pseudorot::to_json(c.alpha.cf);
  }
  j["alpha"] = a;
  Json h;
  h["family"] = to_string(c.family.kind);
  h["epsilon"] = decimal(c.family.epsilon);
  h["mode"] = mode_json(c.family.mode);
  Json g = Json::array();
  for (const auto& m : c.family.generators) g.push_back(mode_json(m));
  h["generators"] = g;
  j["hamiltonian"] = h;
  j["flow"] = {{"method", c.flow.method}, {"step", c.flow.step}, {"rtol", c.flow.rtol},
               {"probe_h", c.flow.probe_h}, {"n", list(c.flow.n)}};
  j["rigidity"] = {{"J", c.rigidity.J},
                   {"policy", c.rigidity.policy},
                   {"flow_n_max", c.rigidity.flow_n_max},
                   {"floer", c.rigidity.floer},
                   {"floer_n_max", c.rigidity.floer_n_max},
                   {"floer_frac_min", c.rigidity.floer_frac_min},
                   {"hessian_nt", c.rigidity.hessian_nt},
                   {"hessian_nr", c.rigidity.hessian_nr},
                   {"hessian_ntheta", c.rigidity.hessian_ntheta}};
  j["floer"] = {{"n", list(c.floer.n)},
                {"Ns", c.floer.Ns},
                {"nt_per_unit", c.floer.nt_per_unit},
                {"max_iterations", c.floer.max_iterations},
                {"residual_tol", c.floer.residual_tol},
                {"tail_tol", c.floer.tail_tol},
                {"S_max", c.floer.S_max},
                {"penalty", c.floer.penalty}};
  j["sobolev"] = {{"domain", c.sobolev.domain}, {"trials", c.sobolev.trials}, {"periods", list(c.sobolev.periods)}};
  Json sa = Json::array(), sb = Json::array();
  for (const auto& s : c.mixing.A) sa.push_back(sector_json(s));
  for (const auto& s : c.mixing.B) sb.push_back(sector_json(s));
  j["mixing"] = {{"samples", c.mixing.samples}, {"step", c.mixing.step}, {"n", list(c.mixing.n)}, {"A", sa}, {"B", sb}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

// Parses and validates; throws ConfigError carrying every violation found.
inline ExperimentConfig config_from_json(const Json& j) {
  using namespace config_detail;
  std::vector<std::string> errors;
  Reader r(&errors);
  ExperimentConfig c;
  r.keys(j, "config", {"type", "alpha", "hamiltonian", "flow", "rigidity", "floer", "sobolev", "mixing", "seed", "out_dir"});
  if (!j.is_object()) throw ConfigError(errors);
  if (j.contains("type") && j.at("type") != "experiment_config") r.fail("config.type", "expected \"experiment_config\"");

  if (j.contains("alpha")) {
    const Json& a = j.at("alpha");
    std::string kind = "lstar";
    r.get(a, "kind", "alpha", kind);
    if (kind == "lstar") {
      r.keys(a, "alpha", {"kind", "a0", "seed", "depth", "bit_budget"});
      r.get(a, "a0", "alpha", c.alpha.a0);
      r.get(a, "seed", "alpha", c.alpha.seed);
      r.get(a, "depth", "alpha", c.alpha.depth);
      r.get(a, "bit_budget", "alpha", c.alpha.bit_budget);
      if (c.alpha.depth < static_cast<long>(c.alpha.seed.size()))
        r.fail("alpha.depth", "must be at least the number of seed quotients");
      for (const auto& q : c.alpha.seed)
        if (q < 1) r.fail("alpha.seed", "partial quotients must be >= 1");
      if (c.alpha.bit_budget == 0) r.fail("alpha.bit_budget", "must be positive");
    } else if (kind == "explicit") {
      c.alpha.kind = AlphaSpec::Kind::explicit_cf;
      r.keys(a, "alpha", {"kind", "cf"});
      if (!a.is_object() || !a.contains("cf")) {
        r.fail("alpha.cf", "required for kind \"explicit\"");
      } else {
        try {
          c.alpha.cf = continued_fraction_from_json(a.at("cf"));
        } catch (const std::exception& e) {
          r.fail("alpha.cf", e.what());
        }
      }
    } else {
      r.fail("alpha.kind", "expected \"lstar\" or \"explicit\"");
    }
  }

  if (j.contains("hamiltonian")) {
    const Json& h = j.at("hamiltonian");
    r.keys(h, "hamiltonian", {"family", "epsilon", "mode", "generators"});
    std::string fam = "rigid";
    r.get(h, "family", "hamiltonian", fam);
    try {
      c.family.kind = family_kind_from_string(fam);
    } catch (const std::exception& e) {
      r.fail("hamiltonian.family", e.what());
    }
    r.get(h, "epsilon", "hamiltonian", c.family.epsilon);
    if (!(c.family.epsilon >= 0)) r.fail("hamiltonian.epsilon", "must be >= 0");
    auto mode = [&](const Json& m, const std::string& p) {
      ModeSpec s;
      r.keys(m, p, {"m", "p", "k", "phase", "amplitude"});
      r.get(m, "m", p, s.m);
      r.get(m, "p", p, s.p);
      r.get(m, "k", p, s.k);
      r.get(m, "phase", p, s.phase);
      r.get(m, "amplitude", p, s.amplitude);
      if (s.m < 0 || s.p < 1) r.fail(p, "need m >= 0 and p >= 1");
      return s;
    };
    if (h.is_object() && h.contains("mode")) c.family.mode = mode(h.at("mode"), "hamiltonian.mode");
    if (h.is_object() && h.contains("generators")) {
      const Json& g = h.at("generators");
      if (!g.is_array()) {
        r.fail("hamiltonian.generators", "expected an array");
      } else {
        for (std::size_t i = 0; i < g.size(); ++i)
          c.family.generators.push_back(mode(g[i], "hamiltonian.generators[" + std::to_string(i) + "]"));
      }
    }
    if (c.family.kind == FamilyKind::staged && c.family.generators.empty())
      r.fail("hamiltonian.generators", "the staged family needs at least one generator");
  }

  if (j.contains("flow")) {
    const Json& f = j.at("flow");
    r.keys(f, "flow", {"method", "step", "rtol", "probe_h", "n"});
    r.get(f, "method", "flow", c.flow.method);
    r.get(f, "step", "flow", c.flow.step);
    r.get(f, "rtol", "flow", c.flow.rtol);
    r.get(f, "probe_h", "flow", c.flow.probe_h);
    r.get(f, "n", "flow", c.flow.n);
  }
  if (c.flow.method != "rk4" && c.flow.method != "dopri5") r.fail("flow.method", "expected \"rk4\" or \"dopri5\"");
  if (!(c.flow.step > 0)) r.fail("flow.step", "must be positive");
  if (!(c.flow.probe_h > 0 && c.flow.probe_h <= 1)) r.fail("flow.probe_h", "must lie in (0, 1]");
  for (long n : c.flow.n)
    if (n < 0) r.fail("flow.n", "iterate counts must be >= 0");

  if (j.contains("rigidity")) {
    const Json& g = j.at("rigidity");
    r.keys(g, "rigidity", {"J", "policy", "flow_n_max", "floer", "floer_n_max", "floer_frac_min", "hessian_nt", "hessian_nr", "hessian_ntheta"});
    r.get(g, "J", "rigidity", c.rigidity.J);
    r.get(g, "policy", "rigidity", c.rigidity.policy);
    r.get(g, "flow_n_max", "rigidity", c.rigidity.flow_n_max);
    r.get(g, "floer", "rigidity", c.rigidity.floer);
    r.get(g, "floer_n_max", "rigidity", c.rigidity.floer_n_max);
    r.get(g, "floer_frac_min", "rigidity", c.rigidity.floer_frac_min);
    r.get(g, "hessian_nt", "rigidity", c.rigidity.hessian_nt);
    r.get(g, "hessian_nr", "rigidity", c.rigidity.hessian_nr);
    r.get(g, "hessian_ntheta", "rigidity", c.rigidity.hessian_ntheta);
  }
  if (c.rigidity.J < 0) r.fail("rigidity.J", "must be >= 0");
  try {
    parse_selection_policy(c.rigidity.policy);
  } catch (const std::exception& e) {
    r.fail("rigidity.policy", e.what());
  }
  if (c.rigidity.hessian_nt < 1 || c.rigidity.hessian_nr < 1 || c.rigidity.hessian_ntheta < 1)
    r.fail("rigidity.hessian_*", "grid sizes must be positive");

  if (j.contains("floer")) {
    const Json& f = j.at("floer");
    r.keys(f, "floer", {"n", "Ns", "nt_per_unit", "max_iterations", "residual_tol", "tail_tol", "S_max", "penalty"});
    r.get(f, "n", "floer", c.floer.n);
    r.get(f, "Ns", "floer", c.floer.Ns);
    r.get(f, "nt_per_unit", "floer", c.floer.nt_per_unit);
    r.get(f, "max_iterations", "floer", c.floer.max_iterations);
    r.get(f, "residual_tol", "floer", c.floer.residual_tol);
    r.get(f, "tail_tol", "floer", c.floer.tail_tol);
    r.get(f, "S_max", "floer", c.floer.S_max);
    r.get(f, "penalty", "floer", c.floer.penalty);
  }
  if (c.floer.Ns < 2 || c.floer.nt_per_unit < 2) r.fail("floer.Ns", "grid needs Ns >= 2 and nt_per_unit >= 2");
  if (!(c.floer.tail_tol > 0 && c.floer.tail_tol < 1)) r.fail("floer.tail_tol", "must lie in (0, 1)");

  if (j.contains("sobolev")) {
    const Json& s = j.at("sobolev");
    r.keys(s, "sobolev", {"domain", "trials", "periods"});
    r.get(s, "domain", "sobolev", c.sobolev.domain);
    r.get(s, "trials", "sobolev", c.sobolev.trials);
    r.get(s, "periods", "sobolev", c.sobolev.periods);
  }
  try {
    sobolev_domain_from_string(c.sobolev.domain);
  } catch (const std::exception& e) {
    r.fail("sobolev.domain", e.what());
  }
  if (c.sobolev.trials < 1) r.fail("sobolev.trials", "must be >= 1");
  if (c.sobolev.periods.empty()) r.fail("sobolev.periods", "must not be empty");
  for (long n : c.sobolev.periods)
    if (n < 1) r.fail("sobolev.periods", "periods must be >= 1");

  if (j.contains("mixing")) {
    const Json& m = j.at("mixing");
    r.keys(m, "mixing", {"samples", "step", "n", "A", "B"});
    r.get(m, "samples", "mixing", c.mixing.samples);
    r.get(m, "step", "mixing", c.mixing.step);
    r.get(m, "n", "mixing", c.mixing.n);
    auto region = [&](const char* key, std::vector<AnnularSector>& out) {
      if (!m.is_object() || !m.contains(key)) return;
      const Json& a = m.at(key);
      const std::string p = std::string("mixing.") + key;
      if (!a.is_array() || a.empty()) return r.fail(p, "expected a nonempty array of sectors");
      out.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string q = p + "[" + std::to_string(i) + "]";
        AnnularSector s;
        r.keys(a[i], q, {"r0", "r1", "theta0", "theta1"});
        r.get(a[i], "r0", q, s.r0);
        r.get(a[i], "r1", q, s.r1);
        r.get(a[i], "theta0", q, s.theta0);
        r.get(a[i], "theta1", q, s.theta1);
        try {
          s.validate();
        } catch (const std::exception& e) {
          r.fail(q, e.what());
        }
        out.push_back(s);
      }
    };
    region("A", c.mixing.A);
    region("B", c.mixing.B);
  }
  if (c.mixing.samples < 1) r.fail("mixing.samples", "must be >= 1");
  if (!(c.mixing.step > 0)) r.fail("mixing.step", "must be positive");
  for (long n : c.mixing.n)
    if (n < 0) r.fail("mixing.n", "iterate counts must be >= 0");

  r.get(j, "seed", "config", c.seed);
  r.get(j, "out_dir", "config", c.out_dir);

  // Cross-reference: solver n values must come from the rigidity sequence.
  if (errors.empty() && !c.floer.n.empty()) {
    try {
      const RigiditySequence seq =
          rigidity_sequence(c.alpha.build(), c.rigidity.J, parse_selection_policy(c.rigidity.policy));
      std::string members;
      for (const auto& e : seq.entries) members += (members.empty() ? "" : ",") + e.n.str();
      for (long n : c.floer.n) {
        bool found = false;
        for (const auto& e : seq.entries) found = found || e.n == n;
        if (!found)
          r.fail("floer.n", "n = " + std::to_string(n) + " is not in the rigidity sequence given by alpha and rigidity.J (" +
                                (members.empty() ? std::string("empty") : members) + ")");
      }
    } catch (const std::exception& e) {
      r.fail("alpha", e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("missing_file", "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("config: not valid JSON: ") + e.what()});
  }
  return config_from_json(j);
}

// Canonical text: the form that is hashed and written back out.
inline std::string canonical_text(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace pseudorot::cli
