#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "fiberatlas/error.hpp"

namespace fiberatlas::polycore {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational make_rational(long long num, long long den = 1) {
  if (den == 0) throw InvalidArgument("zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline std::string numerator_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str();
}

inline std::string denominator_string(const Rational& r) {
  return boost::multiprecision::denominator(r).str();
}

// Accepts "12", "-3/4", "0.125", "1e-3" and returns the exact value.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&] { throw ParseError("not a rational literal: '" + s + "'"); };
  if (s.empty()) fail();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(std::string_view(s).substr(0, slash));
    Rational den = parse_rational(std::string_view(s).substr(slash + 1));
    if (den == 0) throw InvalidArgument("zero denominator in '" + s + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  Integer mantissa = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool seen_dot = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = mantissa * 10 + (c - '0');
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) fail();
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') fail();
    try {
      std::size_t used = 0;
      exponent = std::stol(s.substr(pos + 1), &used);
      if (pos + 1 + used != s.size()) fail();
    } catch (const std::logic_error&) {
      fail();
    }
  }
  exponent -= frac_digits;
  Rational value(mantissa);
  Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    value /= Rational(scale);
  } else {
    value *= Rational(scale);
  }
  return negative ? Rational(-value) : value;
}

// Exact binary value of a double; used when float inputs enter exact code.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
  int exp = 0;
  double mant = std::frexp(x, &exp);
  // 53 bits of mantissa are exact after scaling.
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r{Integer(scaled)};
  Integer two_pow = boost::multiprecision::pow(Integer(2), static_cast<unsigned>(exp < 0 ? -exp : exp));
  if (exp < 0) {
    r /= Rational(two_pow);
  } else {
    r *= Rational(two_pow);
  }
  return r;
}

}  // namespace fiberatlas::polycore
