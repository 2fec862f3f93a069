#pragma once

#include <cstdint>
#include <string>

#include "pseudorot/diophantine/bignum.hpp"

namespace pseudorot {

constexpr std::uint64_t kDefaultBitBudget = std::uint64_t{1} << 20;

namespace detail {

// m * 2^e with |m| held to a bounded number of bits.
struct Dyadic {
  Integer m;
  std::int64_t e = 0;
};

inline Dyadic truncate(Dyadic d, std::uint64_t bits, bool round_up) {
  const std::uint64_t len = bit_length(d.m);
  if (len <= bits) return d;
  const std::uint64_t shift = len - bits;
  Integer q = round_up ? ceil_div(d.m, pow2(shift)) : floor_div(d.m, pow2(shift));
  return {q, d.e + static_cast<std::int64_t>(shift)};
}

inline Dyadic mul(const Dyadic& a, const Dyadic& b, std::uint64_t bits, bool round_up) {
  return truncate({a.m * b.m, a.e + b.e}, bits, round_up);
}

inline Rational to_rational(const Dyadic& d) {
  if (d.e >= 0) return Rational(d.m * pow2(static_cast<std::uint64_t>(d.e)));
  return make_rational(d.m, pow2(static_cast<std::uint64_t>(-d.e)));
}

// Enclosure of e as [lo, hi] * 2^-frac_bits via truncated series
// sum 1/i! with each term floored; the remainder after N terms is < 2/(N+1)!.
inline void e_bounds(std::uint64_t frac_bits, Dyadic& lo, Dyadic& hi) {
  const Integer one = pow2(frac_bits);
  Integer term = one, sum = 0;
  std::uint64_t i = 0;
  while (term != 0) {
    sum += term;
    ++i;
    term /= i;
  }
  // Each floored term lost < 2 units; the tail beyond the zero term is < 2 units.
  lo = {sum, -static_cast<std::int64_t>(frac_bits)};
  hi = {sum + 2 * Integer(i) + 4, -static_cast<std::int64_t>(frac_bits)};
}

}  // namespace detail

// Certified rational enclosure of e^x for a nonnegative integer x, with
// relative width about 2^-precision_bits.
inline RationalInterval exp_enclosure(const Integer& x, std::uint64_t precision_bits) {
  if (x < 0) throw InvalidArgument("exp_enclosure expects x >= 0");
  if (x == 0) return {Rational(1), Rational(1)};
  const std::uint64_t xbits = bit_length(x);
  const std::uint64_t work = precision_bits + 2 * xbits + 16;
  detail::Dyadic elo, ehi;
  detail::e_bounds(work, elo, ehi);
  detail::Dyadic rlo{Integer(1), 0}, rhi{Integer(1), 0};
  for (std::uint64_t b = xbits; b-- > 0;) {
    rlo = detail::mul(rlo, rlo, work, false);
    rhi = detail::mul(rhi, rhi, work, true);
    if (boost::multiprecision::bit_test(x, static_cast<unsigned>(b))) {
      rlo = detail::mul(rlo, elo, work, false);
      rhi = detail::mul(rhi, ehi, work, true);
    }
  }
  return {detail::to_rational(rlo), detail::to_rational(rhi)};
}

// Size in bits of e^x, rounded up; used for budget checks before any
// big computation happens.
inline double exp_bit_size(const Integer& x) { return to_double(x) * 1.4426950408889634 + 1.0; }

// ⌈e^x⌉ for integer x ≥ 0. Precision doubles until the floor is decided.
inline Integer ceil_exp(const Integer& x, std::uint64_t bit_budget = kDefaultBitBudget) {
  if (x == 0) return 1;
  const double size = exp_bit_size(x);
  if (size > static_cast<double>(bit_budget))
    throw BudgetExceeded("e^" + x.str() + " needs about " + std::to_string(size) +
                             " bits, budget is " + std::to_string(bit_budget),
                         -1);
  std::uint64_t prec = static_cast<std::uint64_t>(size) + 64;
  for (int attempt = 0; attempt < 8; ++attempt, prec *= 2) {
    RationalInterval enc = exp_enclosure(x, prec);
    Integer flo = floor(enc.lo), fhi = floor(enc.hi);
    // e^x is transcendental for x > 0, so it is never an integer.
    if (flo == fhi) return flo + 1;
  }
  throw InsufficientPrecision("could not separate e^" + x.str() + " from an integer", -1);
}

enum class Certainty { certified, refuted, unknown };

inline std::string to_string(Certainty c) {
  switch (c) {
    case Certainty::certified: return "certified";
    case Certainty::refuted: return "refuted";
    default: return "unknown";
  }
}

// Decides v < e^{-x} (v > 0, x ≥ 0 integer). Cheap bit-length tests settle
// lopsided cases; otherwise exact comparison against rational bounds.
inline Certainty less_than_exp_neg(const Rational& v, const Integer& x,
                                   std::uint64_t bit_budget = kDefaultBitBudget) {
  if (v <= 0) return Certainty::certified;
  if (x < 0) throw InvalidArgument("less_than_exp_neg expects x >= 0");
  const Log2Bounds lv = log2_bounds(v);
  const double target = -to_double(x) * 1.4426950408889634;
  const double slack = 2.0 + 1e-9 * std::fabs(target);
  if (lv.lo > target + slack) return Certainty::refuted;
  if (exp_bit_size(x) > static_cast<double>(bit_budget)) {
    return Certainty::unknown;
  }
  for (std::uint64_t prec = 64; prec <= 4096; prec *= 4) {
    RationalInterval e = exp_enclosure(x, prec);
    if (v * e.hi < 1) return Certainty::certified;
    if (v * e.lo >= 1) return Certainty::refuted;
  }
  return Certainty::unknown;
}

}  // namespace pseudorot
