#pragma once

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace flatbez {

/// Exact rational number. All symbolic work happens over this type.
using Rational = mpq_class;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline mpz_class pow10(unsigned e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

/// Parses "p/q", decimals ("-1.25", ".5") and scientific notation ("1e-3")
/// into the exact rational they denote, so "1.3" becomes 13/10.
inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw ParseError("empty rational literal");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    Rational q = num / den;
    q.canonicalize();
    return q;
  }

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view ex = s.substr(e + 1);
    bool ex_neg = false;
    if (!ex.empty() && (ex.front() == '+' || ex.front() == '-')) {
      ex_neg = ex.front() == '-';
      ex.remove_prefix(1);
    }
    if (!detail::all_digits(ex) || ex.size() > 6)
      throw ParseError("bad exponent in '" + std::string(text) + "'");
    exponent = std::stol(std::string(ex));
    if (ex_neg) exponent = -exponent;
    s = s.substr(0, e);
  }
  std::string digits;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if ((!ip.empty() && !detail::all_digits(ip)) || (!fp.empty() && !detail::all_digits(fp)) ||
        (ip.empty() && fp.empty()))
      throw ParseError("bad number '" + std::string(text) + "'");
    digits = std::string(ip) + std::string(fp);
    exponent -= static_cast<long>(fp.size());
  } else {
    if (!detail::all_digits(s)) throw ParseError("bad number '" + std::string(text) + "'");
    digits = std::string(s);
  }
  if (digits.empty()) digits = "0";
  Rational q{mpz_class(digits, 10)};
  if (exponent > 0)
    q *= detail::pow10(static_cast<unsigned>(exponent));
  else if (exponent < 0)
    q /= detail::pow10(static_cast<unsigned>(-exponent));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

/// Exact value of a binary64 number.
inline Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw ParseError("non-finite value cannot be made rational");
  return Rational(x);
}

/// Shortest round-trip decimal text of a double, read back exactly.
/// 0.4 becomes 2/5 rather than the binary neighbour of 0.4.
inline Rational decimal_rational(double x) {
  if (!std::isfinite(x)) throw ParseError("non-finite value cannot be made rational");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw ParseError("to_chars failed");
  return parse_rational(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Nearest-ish double below / above q (outward rounding for interval work).
inline double round_down(const Rational& q) {
  double d = q.get_d();
  if (Rational(d) > q) d = std::nextafter(d, -INFINITY);
  return d;
}

inline double round_up(const Rational& q) {
  double d = q.get_d();
  if (Rational(d) < q) d = std::nextafter(d, INFINITY);
  return d;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Shortest text that round-trips the double; used for all numeric output.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

}  // namespace flatbez
