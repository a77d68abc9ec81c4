#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "stratakit/errors.hpp"

namespace stratakit {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using RationalVector = std::vector<Rational>;
using IntVector = std::vector<std::int64_t>;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw DomainError("zero denominator");
  // the backend expects a positive denominator
  if (den < 0) return Rational(-Integer(num), -Integer(den));
  return Rational(Integer(num), Integer(den));
}

inline RationalVector to_rational(const IntVector& v) {
  RationalVector out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(x);
  return out;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::vector<double> to_double(const RationalVector& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(to_double(x));
  return out;
}

inline bool is_zero(const RationalVector& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}

inline std::int64_t to_int64(const Integer& z) {
  if (z > std::numeric_limits<std::int64_t>::max() ||
      z < std::numeric_limits<std::int64_t>::min())
    throw ResourceError("integer does not fit in 64 bits: " + z.str());
  return z.convert_to<std::int64_t>();
}

/// Serializes as "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& r) {
  const Integer& num = boost::multiprecision::numerator(r);
  const Integer& den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view s) -> Integer {
    if (s.empty()) throw InputError("empty integer in rational '" + std::string(text) + "'");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw InputError("malformed rational '" + std::string(text) + "'");
    for (std::size_t k = i; k < s.size(); ++k)
      if (s[k] < '0' || s[k] > '9')
        throw InputError("malformed rational '" + std::string(text) + "'");
    return Integer(std::string(s));
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  Integer den = parse_int(text.substr(slash + 1));
  if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  Integer num = parse_int(text.substr(0, slash));
  if (den < 0) num = -num, den = -den;
  return Rational(num, den);
}

}  // namespace stratakit
