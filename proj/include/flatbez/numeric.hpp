#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace flatbez {

struct Extremum {
  double x;
  double value;
};

/// Maximum of f on [a,b]: a uniform scan brackets the best grid point, then
/// golden-section search refines inside the bracket.
inline Extremum maximize(const std::function<double(double)>& f, double a, double b,
                         int scan = 2000, double tol = 1e-13) {
  double best_x = a, best = f(a);
  const double h = (b - a) / scan;
  for (int i = 1; i <= scan; ++i) {
    const double x = a + h * i;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - h), hi = std::min(b, best_x + h);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (lo + hi), fm = f(xm);
  if (fm > best) return {xm, fm};
  return {best_x, best};
}

inline Extremum minimize(const std::function<double(double)>& f, double a, double b,
                         int scan = 2000, double tol = 1e-13) {
  auto r = maximize([&f](double x) { return -f(x); }, a, b, scan, tol);
  return {r.x, -r.value};
}

}  // namespace flatbez
