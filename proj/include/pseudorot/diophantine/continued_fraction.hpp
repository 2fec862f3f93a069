#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "pseudorot/diophantine/bignum.hpp"

namespace pseudorot {

// Enclosure of the complete quotient x_{M+1} = [a_{M+1}; a_{M+2}, ...].
// An absent upper end means the tail is only bounded below.
// `exp_lower`, when present, adds the bound x_{M+1} ≥ e^{exp_lower}, which
// stays exact even when e^{exp_lower} is too large to expand.
struct TailBound {
  Rational lower{1};
  std::optional<Rational> upper;
  std::optional<Integer> exp_lower;
};

// α = [a0; a1, ..., aM] followed by a tail described by `tail`. Without a
// tail the expansion terminates and α = p_M/q_M exactly.
struct ContinuedFraction {
  Integer a0 = 0;
  std::vector<Integer> quotients;
  std::optional<TailBound> tail;

  long depth() const { return static_cast<long>(quotients.size()); }
  bool terminated() const { return !tail.has_value(); }
  const Integer& quotient(long m) const {
    return m == 0 ? a0 : quotients.at(static_cast<std::size_t>(m - 1));
  }

  void validate() const {
    for (std::size_t i = 0; i < quotients.size(); ++i)
      if (quotients[i] < 1)
        throw InvalidArgument("partial quotient a" + std::to_string(i + 1) + " must be >= 1");
    if (tail) {
      if (tail->lower < 1) throw InvalidArgument("tail lower bound must be >= 1");
      if (tail->upper && *tail->upper < tail->lower)
        throw InvalidArgument("tail upper bound below lower bound");
      if (tail->exp_lower && *tail->exp_lower < 0)
        throw InvalidArgument("tail exponent bound must be nonnegative");
    }
  }
};

struct Convergent {
  Integer p;
  Integer q;
  long index = 0;
};

inline std::vector<Convergent> convergents(const ContinuedFraction& cf, long depth) {
  if (depth < 0) throw InvalidArgument("negative depth");
  if (depth > cf.depth())
    throw InsufficientExpansion("requested depth " + std::to_string(depth) + " but only " +
                                    std::to_string(cf.depth()) + " partial quotients stored",
                                cf.depth());
  std::vector<Convergent> out;
  out.reserve(static_cast<std::size_t>(depth) + 1);
  Integer p_prev = 1, q_prev = 0, p = cf.a0, q = 1;
  out.push_back({p, q, 0});
  for (long m = 1; m <= depth; ++m) {
    const Integer& a = cf.quotient(m);
    Integer pn = a * p + p_prev, qn = a * q + q_prev;
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
    out.push_back({p, q, m});
  }
  return out;
}

inline std::vector<Convergent> convergents(const ContinuedFraction& cf) {
  return convergents(cf, cf.depth());
}

// Exact value of [a_{from}; a_{from+1}, ..., a_M] for a terminated expansion.
inline Rational complete_quotient_exact(const ContinuedFraction& cf, long from) {
  Rational x = cf.quotient(cf.depth());
  for (long m = cf.depth() - 1; m >= from; --m) x = Rational(cf.quotient(m)) + 1 / x;
  return x;
}

// Enclosure of x_{m+1}, the complete quotient after depth m. `upper` empty
// means unbounded above.
struct QuotientRange {
  Rational lo;
  std::optional<Rational> hi;
};

inline QuotientRange complete_quotient_range(const ContinuedFraction& cf, long m) {
  if (m < cf.depth()) {
    if (cf.terminated()) {
      Rational x = complete_quotient_exact(cf, m + 1);
      return {x, x};
    }
    // x_{m+1} = a_{m+1} + 1/x_{m+2}, enclosed from the deeper quotients and the tail.
    const Integer& a = cf.quotient(m + 1);
    const QuotientRange next = complete_quotient_range(cf, m + 1);
    const Rational lo = next.hi ? Rational(a) + 1 / *next.hi : Rational(a);
    return {lo, Rational(a) + 1 / next.lo};
  }
  if (cf.terminated()) throw InvalidArgument("terminated expansion has no tail beyond depth");
  return {cf.tail->lower, cf.tail->upper};
}

struct ValueEnclosure {
  RationalInterval range;
  bool exact = false;  // α is rational and equal to range.lo
};

// Enclosure of α using partial quotients up to `depth` (default: all).
inline ValueEnclosure value_enclosure(const ContinuedFraction& cf, long depth = -1) {
  if (depth < 0) depth = cf.depth();
  auto cs = convergents(cf, depth);
  const Integer& p = cs.back().p;
  const Integer& q = cs.back().q;
  if (cf.terminated() && depth == cf.depth()) return {{Rational(p, q), Rational(p, q)}, true};
  Integer pp = depth == 0 ? Integer(1) : cs[cs.size() - 2].p;
  Integer qp = depth == 0 ? Integer(0) : cs[cs.size() - 2].q;
  QuotientRange x = complete_quotient_range(cf, depth);
  auto eval = [&](const Rational& xv) { return (xv * p + pp) / (xv * q + qp); };
  Rational v1 = eval(x.lo);
  Rational v2 = x.hi ? eval(*x.hi) : Rational(p, q);
  if (v2 < v1) std::swap(v1, v2);
  return {{v1, v2}, false};
}

// Enclosure of |α − p_m/q_m| = 1/(q_m(x_{m+1} q_m + q_{m−1})).
inline RationalInterval convergent_gap(const ContinuedFraction& cf, long m) {
  if (m < 0 || m > cf.depth()) throw InsufficientExpansion("gap beyond stored depth", cf.depth());
  if (cf.terminated() && m == cf.depth()) return {Rational(0), Rational(0)};
  auto cs = convergents(cf, m);
  const Integer& q = cs.back().q;
  Integer qp = m == 0 ? Integer(0) : cs[cs.size() - 2].q;
  QuotientRange x = complete_quotient_range(cf, m);
  Rational hi = 1 / (Rational(q) * (x.lo * q + qp));
  Rational lo = x.hi ? 1 / (Rational(q) * (*x.hi * q + qp)) : Rational(0);
  return {lo, hi};
}

// Terminated expansion of a rational number (Euclid).
inline ContinuedFraction cf_from_rational(const Rational& r) {
  ContinuedFraction cf;
  Integer num = boost::multiprecision::numerator(r), den = boost::multiprecision::denominator(r);
  cf.a0 = floor_div(num, den);
  num -= cf.a0 * den;
  while (num != 0) {
    std::swap(num, den);
    Integer a = floor_div(num, den);
    cf.quotients.push_back(a);
    num -= a * den;
  }
  return cf;
}

// Enclosure of {nα}. For irrational α the endpoints are never attained, so
// `upper` may equal 1. `exact` marks a rational α, where lower == upper.
struct FractionalPartEnclosure {
  Integer n;
  Rational lower;
  Rational upper;
  bool exact = false;
};

inline FractionalPartEnclosure fractional_part_multiple(const ContinuedFraction& cf,
                                                        const Integer& n) {
  if (n <= 0) throw InvalidArgument("n must be positive");
  ValueEnclosure v = value_enclosure(cf);
  Rational lo = v.range.lo * n, hi = v.range.hi * n;
  Integer k = floor(lo);
  if (v.exact) return {n, lo - k, lo - k, true};
  if (hi - lo >= 1)
    throw InsufficientPrecision("enclosure of n*alpha is wider than 1; extend the expansion",
                                cf.depth() + 1);
  if (hi > Rational(k + 1)) {
    // The enclosure contains the integer k+1 in its interior.
    long need = cf.depth() + 1;
    auto cs = convergents(cf);
    if (cs.back().q <= n) need = cf.depth() + 2;
    throw InsufficientPrecision("enclosure of n*alpha straddles an integer; need depth about " +
                                    std::to_string(need),
                                need);
  }
  return {n, lo - k, hi - k, false};
}

}  // namespace pseudorot
