#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "flatbez/rational.hpp"

namespace flatbez {

/// Closed interval [lo, hi] with outward-rounded arithmetic: an inexact
/// floating result is stepped one ulp outward, so the true real result is
/// always enclosed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  constexpr Interval(double point) : lo(point), hi(point) {}  // NOLINT(google-explicit-constructor)
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) throw std::invalid_argument("Interval: lo > hi");
  }

  static Interval enclose(const Rational& q) { return {round_down(q), round_up(q)}; }

  double width() const { return hi - lo; }
  double mid() const { return lo + 0.5 * (hi - lo); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool is_point() const { return lo == hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

namespace detail {
inline double down(double x) { return std::nextafter(x, -INFINITY); }
inline double up(double x) { return std::nextafter(x, INFINITY); }

// Rounded sum/product stepped outward only when inexact; the rounding error
// comes from TwoSum and fma respectively.
inline double sum_down(double a, double b) {
  const double s = a + b, bb = s - a, err = (a - (s - bb)) + (b - bb);
  return err < 0.0 ? down(s) : s;
}
inline double sum_up(double a, double b) {
  const double s = a + b, bb = s - a, err = (a - (s - bb)) + (b - bb);
  return err > 0.0 ? up(s) : s;
}
// Near underflow the fma residual itself may round to zero, so widen there.
inline bool mul_unsafe(double a, double b, double p) {
  return !std::isfinite(p) || (a != 0.0 && b != 0.0 && std::fabs(p) < 1e-290);
}
inline double mul_down(double a, double b) {
  const double p = a * b;
  return std::fma(a, b, -p) < 0.0 || mul_unsafe(a, b, p) ? down(p) : p;
}
inline double mul_up(double a, double b) {
  const double p = a * b;
  return std::fma(a, b, -p) > 0.0 || mul_unsafe(a, b, p) ? up(p) : p;
}
}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = detail::sum_down(a.lo, b.lo);
  r.hi = detail::sum_up(a.hi, b.hi);
  return r;
}

inline Interval operator-(const Interval& a) {
  Interval r;
  r.lo = -a.hi;
  r.hi = -a.lo;
  return r;
}

inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

inline Interval operator*(const Interval& a, const Interval& b) {
  if ((a.lo == 0.0 && a.hi == 0.0) || (b.lo == 0.0 && b.hi == 0.0)) return Interval(0.0);
  const double lo[] = {detail::mul_down(a.lo, b.lo), detail::mul_down(a.lo, b.hi),
                       detail::mul_down(a.hi, b.lo), detail::mul_down(a.hi, b.hi)};
  const double hi[] = {detail::mul_up(a.lo, b.lo), detail::mul_up(a.lo, b.hi),
                       detail::mul_up(a.hi, b.lo), detail::mul_up(a.hi, b.hi)};
  Interval r;
  r.lo = *std::min_element(std::begin(lo), std::end(lo));
  r.hi = *std::max_element(std::begin(hi), std::end(hi));
  return r;
}

/// Exact range rule for x^k: even powers of a zero-straddling interval start at 0.
inline Interval pow(const Interval& x, unsigned k) {
  if (k == 0) return Interval(1.0);
  if (k == 1) return x;
  auto ipow = [k](double v, bool round_up) {
    double r = 1.0;
    for (unsigned i = 0; i < k; ++i) r *= v;
    // k-1 roundings, each within one ulp: widen by k ulps to stay enclosing.
    for (unsigned i = 0; i < k; ++i) r = round_up ? detail::up(r) : detail::down(r);
    return r;
  };
  Interval r;
  if (k % 2 == 1) {
    r.lo = x.lo < 0 ? -ipow(-x.lo, true) : ipow(x.lo, false);
    r.hi = x.hi < 0 ? -ipow(-x.hi, false) : ipow(x.hi, true);
    return r;
  }
  const double alo = std::fabs(x.lo), ahi = std::fabs(x.hi);
  if (x.lo <= 0.0 && x.hi >= 0.0) {
    r.lo = 0.0;
    r.hi = ipow(std::max(alo, ahi), true);
  } else {
    r.lo = std::max(0.0, ipow(std::min(alo, ahi), false));
    r.hi = ipow(std::max(alo, ahi), true);
  }
  return r;
}

inline std::ostream& operator<<(std::ostream& os, const Interval& x) {
  return os << '[' << x.lo << ", " << x.hi << ']';
}

}  // namespace flatbez
