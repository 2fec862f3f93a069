#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "pseudorot/core/errors.hpp"

namespace pseudorot {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  return Rational(num, den);
}

// Number of bits of |x|; 0 for x = 0.
inline std::uint64_t bit_length(const Integer& x) {
  if (x == 0) return 0;
  return mpz_sizeinbase(x.backend().data(), 2);
}

inline Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.backend().data(), a.backend().data(), b.backend().data());
  return q;
}

inline Integer ceil_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_cdiv_q(q.backend().data(), a.backend().data(), b.backend().data());
  return q;
}

inline Integer floor(const Rational& r) {
  return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline Integer ceil(const Rational& r) {
  return ceil_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline Integer pow2(std::uint64_t k) {
  Integer r = 1;
  r <<= static_cast<unsigned long>(k);
  return r;
}

// Natural log of a positive integer, accurate to double precision even when
// the integer is far beyond the double range.
inline double log_abs(const Integer& x) {
  if (x == 0) throw InvalidArgument("log of zero");
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, x.backend().data());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

inline double log_abs(const Rational& r) {
  return log_abs(boost::multiprecision::numerator(r)) -
         log_abs(boost::multiprecision::denominator(r));
}

// Rigorous enclosure of log2|r|, r != 0, from bit lengths alone.
struct Log2Bounds {
  double lo;
  double hi;
};

inline Log2Bounds log2_bounds(const Rational& r) {
  const double bn = static_cast<double>(bit_length(boost::multiprecision::numerator(r)));
  const double bd = static_cast<double>(bit_length(boost::multiprecision::denominator(r)));
  return {bn - 1.0 - bd, bn - bd + 1.0};
}

inline double to_double(const Rational& r) {
  const double l = log_abs(r);
  if (l < -740.0) return 0.0;
  if (l > 709.0) return r > 0 ? HUGE_VAL : -HUGE_VAL;
  return r.convert_to<double>();
}

inline double to_double(const Integer& x) { return x.convert_to<double>(); }

inline Integer parse_integer(const std::string& s) {
  if (s.empty()) throw InvalidArgument("empty integer literal");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw InvalidArgument("bad integer literal: " + s);
  for (std::size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') throw InvalidArgument("bad integer literal: " + s);
  return Integer(s);
}

// Accepts "p/q", an integer, or a finite decimal such as "0.125".
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos)
    return make_rational(parse_integer(s.substr(0, slash)), parse_integer(s.substr(slash + 1)));
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(parse_integer(s));
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  if (digits.empty() || digits == "-" || digits == "+") throw InvalidArgument("bad decimal: " + s);
  Integer den = 1;
  for (std::size_t k = dot + 1; k < s.size(); ++k) den *= 10;
  return make_rational(parse_integer(digits), den);
}

inline std::string to_string(const Integer& x) { return x.str(); }

inline std::string to_string(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

struct RationalInterval {
  Rational lo;
  Rational hi;

  Rational width() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

}  // namespace pseudorot
