#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "flatbez/bezier.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/rational.hpp"

namespace flatbez {

/// Piecewise-linear function through (j/N, c_j), the hat-function form.
class ControlPolygon {
 public:
  explicit ControlPolygon(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("ControlPolygon: no vertices");
  }

  int degree() const { return static_cast<int>(values_.size()) - 1; }
  const std::vector<double>& values() const { return values_; }

  /// Greville abscissa t*_j = j/N.
  double abscissa(std::size_t j) const {
    return degree() == 0 ? 0.0 : static_cast<double>(j) / degree();
  }

  double operator()(double tau) const {
    if (tau < 0.0 || tau > 1.0) throw DomainError("ControlPolygon: tau outside [0,1]");
    const int n = degree();
    if (n == 0) return values_[0];
    const double s = tau * n;
    auto j = static_cast<std::size_t>(std::min<double>(std::floor(s), n - 1));
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * values_[j] + w * values_[j + 1];
  }

 private:
  std::vector<double> values_;
};

/// Lower/upper piecewise-linear envelopes enclosing a Bézier curve.
struct Envelope {
  ControlPolygon lower;
  ControlPolygon upper;
  double dmax = 0.0;
  int degree() const { return lower.degree(); }
};

/// μ∞(N) = ⌊N/2⌋⌈N/2⌉ / (2N).
inline double mu_inf(int n) {
  if (n <= 0) return 0.0;
  return static_cast<double>((n / 2) * ((n + 1) / 2)) / (2.0 * n);
}

/// Sharp bound on the distance from the curve to its control polygon.
inline double dmax(const BezierCurve<double>& curve) {
  if (curve.degree() < 2) return 0.0;
  double m = 0.0;
  for (double d : curve.second_differences()) m = std::max(m, std::fabs(d));
  return mu_inf(curve.degree()) * m;
}

inline ControlPolygon control_polygon(const BezierCurve<double>& curve) {
  return ControlPolygon(curve.control_points());
}

/// Polygon shifted by ∓dmax, endpoints pinned to c_0 and c_N, then each
/// vertex clipped to the min-max box.
inline Envelope build_envelope(const BezierCurve<double>& curve) {
  const auto& c = curve.control_points();
  const double d = dmax(curve);
  auto [lo, hi] = minmax_bounds(curve);
  std::vector<double> lower(c.size()), upper(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    lower[j] = std::max(c[j] - d, lo);
    upper[j] = std::min(c[j] + d, hi);
  }
  lower.front() = upper.front() = c.front();
  lower.back() = upper.back() = c.back();
  return Envelope{ControlPolygon(std::move(lower)), ControlPolygon(std::move(upper)), d};
}

class EnvelopeGapError : public std::runtime_error {
 public:
  EnvelopeGapError(double achieved, int degree)
      : std::runtime_error("refine_envelope: degree cap " + std::to_string(degree) +
                           " reached with gap " + format_double(achieved)),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Degree-elevates one step at a time until dmax ≤ target_gap.
inline Envelope refine_envelope(const BezierCurve<double>& curve, double target_gap,
                                int degree_cap = kMaxDegree) {
  if (!(target_gap > 0.0)) throw DomainError("refine_envelope: target_gap must be positive");
  BezierCurve<double> c = curve;
  double gap = dmax(c);
  while (gap > target_gap) {
    if (c.degree() >= degree_cap) throw EnvelopeGapError(gap, c.degree());
    c = c.degree_elevate(1);
    gap = dmax(c);
  }
  return build_envelope(c);
}

struct Rect {
  double xmin, xmax, ymin, ymax;
};

namespace detail {

/// Intersect [a,b] with {s : p + q*s >= 0}.
inline bool clip_linear(double p, double q, double& a, double& b) {
  if (q == 0.0) return p >= 0.0;
  const double root = -p / q;
  if (q > 0.0)
    a = std::max(a, root);
  else
    b = std::min(b, root);
  return a <= b;
}

}  // namespace detail

/// True iff the region swept by [lower_x,upper_x]×[lower_y,upper_y] for
/// tau ∈ [tau1,tau2] is disjoint from the closed obstacle rectangle. Exact for
/// the piecewise-linear envelopes: on each piece between breakpoints the
/// overlap condition is four linear inequalities in tau.
inline bool obstacle_clear(const Envelope& env_x, const Envelope& env_y, const Rect& obstacle,
                           double tau1, double tau2) {
  if (!(0.0 <= tau1 && tau1 < tau2 && tau2 <= 1.0))
    throw DomainError("obstacle_clear: need 0 <= tau1 < tau2 <= 1");
  std::vector<double> breaks{tau1, tau2};
  for (const Envelope* e : {&env_x, &env_y}) {
    const int n = e->degree();
    for (int j = 1; j < n; ++j) {
      const double t = static_cast<double>(j) / n;
      if (t > tau1 && t < tau2) breaks.push_back(t);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double t0 = breaks[k], t1 = breaks[k + 1], h = t1 - t0;
    // Each bound as value(t0) + slope*s for s ∈ [0, h].
    auto lin = [&](const ControlPolygon& p, double& v0, double& slope) {
      v0 = p(t0);
      slope = (p(t1) - v0) / h;
    };
    double lx, slx, ux, sux, ly, sly, uy, suy;
    lin(env_x.lower, lx, slx);
    lin(env_x.upper, ux, sux);
    lin(env_y.lower, ly, sly);
    lin(env_y.upper, uy, suy);
    double a = 0.0, b = h;
    // Small absolute slack keeps the test conservative against rounding.
    const double eps = 1e-12 * (1.0 + std::fabs(obstacle.xmax) + std::fabs(obstacle.ymax) +
                                std::fabs(obstacle.xmin) + std::fabs(obstacle.ymin));
    if (detail::clip_linear(obstacle.xmax - lx + eps, -slx, a, b) &&
        detail::clip_linear(ux - obstacle.xmin + eps, sux, a, b) &&
        detail::clip_linear(obstacle.ymax - ly + eps, -sly, a, b) &&
        detail::clip_linear(uy - obstacle.ymin + eps, suy, a, b))
      return false;
  }
  return true;
}

/// CSV rows "tau,lower,upper" at the envelope vertices.
inline void write_envelope_csv(std::ostream& os, const Envelope& env) {
  os << "tau,lower,upper\n";
  for (std::size_t j = 0; j < env.lower.values().size(); ++j)
    os << format_double(env.lower.abscissa(j)) << ',' << format_double(env.lower.values()[j])
       << ',' << format_double(env.upper.values()[j]) << '\n';
}

}  // namespace flatbez
