#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pseudorot/diophantine/continued_fraction.hpp"
#include "pseudorot/diophantine/exp_bounds.hpp"

namespace pseudorot {

struct LStarOptions {
  std::uint64_t bit_budget = kDefaultBitBudget;
  // Largest tail lower bound stored explicitly, in bits.
  std::uint64_t tail_cap_bits = 1024;
};

namespace detail {

// Tail enclosure for x_{M+1} given that the next quotient follows the rule
// a_{M+1} = ⌈e^{M q_M}⌉.
inline TailBound rule_tail(long M, const Integer& qM, const LStarOptions& opt) {
  const Integer x = Integer(M) * qM;
  const double bits = exp_bit_size(x);
  if (bits <= static_cast<double>(opt.tail_cap_bits)) {
    Integer a = ceil_exp(x, opt.bit_budget);
    return {Rational(a), Rational(a + 1), x};
  }
  // e^x ≥ 2^k whenever k ≤ x·log2(e); margin covers double rounding.
  const double exact_bits = to_double(x) * 1.4426950408889634;
  double k = std::floor(exact_bits * (1.0 - 1e-12) - 2.0);
  k = std::min(k, static_cast<double>(opt.tail_cap_bits));
  return {Rational(pow2(static_cast<std::uint64_t>(std::max(0.0, k)))), std::nullopt, x};
}

}  // namespace detail

// Decides |α − p_m/q_m| < e^{−x}. Certified from the gap's upper end (or,
// at the last stored depth, from x_{M+1} ≥ e^{E} with E ≥ x, since then
// the gap is below 1/(q² e^E)); refuted only when the gap's lower end
// already fails.
inline Certainty gap_below_exp_neg(const ContinuedFraction& cf, long m, const Integer& q,
                                   const RationalInterval& gap, const Integer& x,
                                   std::uint64_t bit_budget) {
  if (m == cf.depth() && cf.tail && cf.tail->exp_lower && m >= 1 && *cf.tail->exp_lower >= x)
    return Certainty::certified;
  (void)q;
  Certainty hi = less_than_exp_neg(gap.hi, x, bit_budget);
  if (hi == Certainty::certified) return hi;
  if (gap.lo <= 0) return Certainty::unknown;
  Certainty lo = less_than_exp_neg(gap.lo, x, bit_budget);
  return lo == Certainty::refuted ? Certainty::refuted : Certainty::unknown;
}

// Extends `seed` with a_{m+1} = ⌈e^{m q_m}⌉ until the last stored quotient
// has index `depth`. The tail is the rule's next quotient, so the result
// names a single point of L_*.
inline ContinuedFraction construct_lstar(long depth, const ContinuedFraction& seed,
                                         const LStarOptions& opt = {}) {
  if (depth < 0) throw InvalidArgument("depth must be nonnegative");
  ContinuedFraction cf;
  cf.a0 = seed.a0;
  cf.quotients = seed.quotients;
  cf.validate();
  auto cs = convergents(cf);
  Integer q_prev = cs.size() > 1 ? cs[cs.size() - 2].q : Integer(0);
  Integer q = cs.back().q;
  for (long m = cf.depth(); m < depth; ++m) {
    const Integer x = Integer(m) * q;
    if (exp_bit_size(x) > static_cast<double>(opt.bit_budget))
      throw BudgetExceeded("quotient a" + std::to_string(m + 1) + " = ceil(e^" + x.str() +
                               ") exceeds the bit budget; achievable depth " +
                               std::to_string(m),
                           m);
    Integer a = ceil_exp(x, opt.bit_budget);
    cf.quotients.push_back(a);
    Integer qn = a * q + q_prev;
    q_prev = q;
    q = qn;
  }
  cf.tail = detail::rule_tail(cf.depth(), q, opt);
  return cf;
}

inline ContinuedFraction construct_lstar(long depth, const Integer& a0,
                                         const std::vector<Integer>& seed_quotients,
                                         const LStarOptions& opt = {}) {
  ContinuedFraction seed;
  seed.a0 = a0;
  seed.quotients = seed_quotients;
  return construct_lstar(depth, seed, opt);
}

struct LStarWitness {
  long k = 0;
  Integer p;
  Integer q;
  long index = 0;
  RationalInterval certified_gap;
};

struct WitnessResult {
  std::optional<LStarWitness> witness;
  Certainty status = Certainty::unknown;
  long searched_depth = 0;
  std::string explanation;
};

// First convergent (index ≥ 1, smallest q) with certified |α − p/q| < e^{−kq}.
inline WitnessResult verify_lstar_witness(const ContinuedFraction& cf, long k,
                                          std::uint64_t bit_budget = kDefaultBitBudget) {
  if (k < 0) throw InvalidArgument("k must be nonnegative");
  WitnessResult res;
  res.searched_depth = cf.depth();
  auto cs = convergents(cf);
  bool undecided = false;
  for (long m = 1; m <= cf.depth(); ++m) {
    RationalInterval gap = convergent_gap(cf, m);
    Certainty c = gap_below_exp_neg(cf, m, cs[m].q, gap, Integer(k) * cs[m].q, bit_budget);
    if (c == Certainty::certified) {
      res.witness = LStarWitness{k, cs[m].p, cs[m].q, m, gap};
      res.status = Certainty::certified;
      res.explanation = "witness at depth " + std::to_string(m);
      return res;
    }
    if (c == Certainty::unknown) undecided = true;
  }
  res.status = undecided ? Certainty::unknown : Certainty::refuted;
  res.explanation = undecided
                        ? "no witness certified up to depth " + std::to_string(cf.depth()) +
                              "; some comparisons exceeded the bit budget"
                        : "every convergent up to depth " + std::to_string(cf.depth()) +
                              " fails the bound";
  return res;
}

enum class SelectionPolicy { prefer_direct, smallest, direct_only };

inline SelectionPolicy parse_selection_policy(const std::string& s) {
  if (s == "prefer_direct") return SelectionPolicy::prefer_direct;
  if (s == "smallest") return SelectionPolicy::smallest;
  if (s == "direct_only") return SelectionPolicy::direct_only;
  throw InvalidArgument("unknown selection policy: " + s);
}

inline std::string to_string(SelectionPolicy p) {
  switch (p) {
    case SelectionPolicy::prefer_direct: return "prefer_direct";
    case SelectionPolicy::smallest: return "smallest";
    default: return "direct_only";
  }
}

struct RigidityEntry {
  long j = 0;
  Integer n;
  long index = 0;
  // {nα}
  RationalInterval frac;
  // The quantity bounded by n e^{−jn}: {nα} itself, or 1 − {nα} when
  // `complement` is set (the inverse map sees −α).
  RationalInterval small;
  bool complement = false;
};

struct RigiditySequence {
  std::vector<RigidityEntry> entries;
  bool complete = true;
  std::string explanation;
};

// Candidate n are convergent denominators q_m, m ≥ 1. For even m the small
// quantity is {q_m α}; for odd m it is 1 − {q_m α}.
inline RigiditySequence rigidity_sequence(const ContinuedFraction& cf, long J,
                                          SelectionPolicy policy = SelectionPolicy::prefer_direct,
                                          std::uint64_t bit_budget = kDefaultBitBudget) {
  RigiditySequence seq;
  if (J <= 0) return seq;
  auto cs = convergents(cf);
  struct Candidate {
    long m;
    RationalInterval gap, frac, small;
    bool complement;
  };
  std::vector<Candidate> cands;
  for (long m = 1; m <= cf.depth(); ++m) {
    RationalInterval gap = convergent_gap(cf, m);
    const Integer& q = cs[m].q;
    RationalInterval small{gap.lo * q, gap.hi * q};
    bool complement = (m % 2 == 1) && small.hi > 0;
    RationalInterval frac = complement ? RationalInterval{1 - small.hi, 1 - small.lo} : small;
    cands.push_back({m, gap, frac, small, complement});
  }
  for (long j = 1; j <= J; ++j) {
    const Candidate* direct = nullptr;
    const Candidate* any = nullptr;
    bool undecided = false;
    for (const auto& c : cands) {
      const Integer& n = cs[c.m].q;
      // small/n is the gap itself
      Certainty ok = gap_below_exp_neg(cf, c.m, n, c.gap, Integer(j) * n, bit_budget);
      if (ok == Certainty::unknown) undecided = true;
      if (ok != Certainty::certified) continue;
      if (!any) any = &c;
      if (!c.complement && !direct) direct = &c;
      if (direct) break;
    }
    const Candidate* pick = nullptr;
    switch (policy) {
      case SelectionPolicy::prefer_direct: pick = direct ? direct : any; break;
      case SelectionPolicy::smallest: pick = any; break;
      case SelectionPolicy::direct_only: pick = direct; break;
    }
    if (!pick) {
      seq.complete = false;
      seq.explanation = "no convergent up to depth " + std::to_string(cf.depth()) +
                        " certifies {n alpha} <= n e^(-" + std::to_string(j) + " n)" +
                        (undecided ? " (some comparisons exceeded the bit budget)" : "");
      return seq;
    }
    seq.entries.push_back({j, cs[pick->m].q, pick->m, pick->frac, pick->small, pick->complement});
  }
  seq.explanation = "complete";
  return seq;
}

// Element of L_* within epsilon of target, certified to `depth` levels.
// Starts from the expansion of target itself and, when that lands too far
// away, appends one large quotient before applying the extension rule.
inline ContinuedFraction approximate_in_lstar(const Rational& target, const Rational& epsilon,
                                              long depth, const LStarOptions& opt = {}) {
  if (epsilon <= 0) throw InvalidArgument("epsilon must be positive");
  ContinuedFraction seed = cf_from_rational(target);
  Integer extra = 0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    ContinuedFraction s = seed;
    if (extra > 0) s.quotients.push_back(extra);
    ContinuedFraction cf = construct_lstar(std::max(depth, s.depth()), s, opt);
    ValueEnclosure v = value_enclosure(cf);
    if (v.range.lo > target - epsilon && v.range.hi < target + epsilon) return cf;
    Integer q = convergents(seed).back().q;
    if (extra == 0) {
      extra = ceil(Rational(2) / (epsilon * q * q)) + 1;
    } else {
      extra *= 2;
    }
  }
  throw InsufficientPrecision("could not place an L_* element within epsilon", depth);
}

struct EvidenceLevel {
  long k = 0;
  bool present = false;
  long index = -1;
  Integer q;
};

struct DiophantineEvidence {
  long depth = 0;
  std::vector<EvidenceLevel> levels;
  std::string label = "finite-depth evidence only; not a proof of Liouville or Diophantine type";
};

// For each k ≤ k_max: is there a convergent with q > k, index ≤ depth, and
// certified |α − p/q| < q^{−k}?
inline DiophantineEvidence classify_diophantine_evidence(const ContinuedFraction& cf, long k_max,
                                                         long depth) {
  DiophantineEvidence ev;
  ev.depth = std::min(depth, cf.depth());
  auto cs = convergents(cf, ev.depth);
  for (long k = 1; k <= k_max; ++k) {
    EvidenceLevel lvl;
    lvl.k = k;
    for (long m = 1; m <= ev.depth; ++m) {
      const Integer& q = cs[m].q;
      if (q <= k) continue;
      RationalInterval gap = convergent_gap(cf, m);
      Integer qk = boost::multiprecision::pow(q, static_cast<unsigned>(k));
      if (gap.hi * qk < 1) {
        lvl.present = true;
        lvl.index = m;
        lvl.q = q;
        break;
      }
    }
    ev.levels.push_back(lvl);
  }
  return ev;
}

// Certified enclosure of 2|sin(π x)| for x in [lo, hi] ⊂ [0, 1], using
// 333/106 < π < 355/113, sin u ≤ u and sin u ≥ u − u³/6.
inline RationalInterval chord_enclosure(const RationalInterval& x) {
  const Rational pi_lo(333, 106), pi_hi(355, 113);
  Rational dlo, dhi;  // distance to the nearest integer
  if (x.hi <= Rational(1, 2)) {
    dlo = x.lo;
    dhi = x.hi;
  } else if (x.lo >= Rational(1, 2)) {
    dlo = 1 - x.hi;
    dhi = 1 - x.lo;
  } else {
    dlo = std::min<Rational>(x.lo, Rational(1 - x.hi));
    dhi = Rational(1, 2);
  }
  Rational ulo = pi_lo * dlo;
  Rational lower = 2 * (ulo - ulo * ulo * ulo / 6);
  if (lower < 0) lower = 0;
  Rational upper = 2 * pi_hi * dhi;
  if (upper > 2) upper = 2;
  return {lower, upper};
}

}  // namespace pseudorot
