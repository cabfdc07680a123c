#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "flatbez/binomial.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/rational.hpp"

namespace flatbez {

/// Coefficient rings a BezierCurve can be instantiated over. A specialization
/// provides the parameter scalar used for evaluation and a way to embed
/// exact rational constants (binomial weights, N/T factors) into the ring.
template <class R>
struct ring_traits;

template <>
struct ring_traits<double> {
  using scalar = double;
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double zero() { return 0.0; }
  static scalar to_scalar(const Rational& q) { return q.get_d(); }
};

template <>
struct ring_traits<Rational> {
  using scalar = Rational;
  static Rational from_rational(const Rational& q) { return q; }
  static Rational zero() { return Rational(0); }
  static scalar to_scalar(const Rational& q) { return q; }
};

/// Bézier curve of degree N over ring R on the time horizon [0, T].
/// Physical time t maps to the curve parameter tau = t / T.
template <class R>
class BezierCurve {
 public:
  using value_type = R;
  using scalar = typename ring_traits<R>::scalar;

  BezierCurve(std::vector<R> control_points, Rational horizon = Rational(1))
      : ctrl_(std::move(control_points)), horizon_(std::move(horizon)) {
    if (ctrl_.empty()) throw DomainError("BezierCurve: needs at least one control point");
    if (ctrl_.size() > static_cast<std::size_t>(kMaxDegree) + 1)
      throw DomainError("BezierCurve: degree exceeds cap " + std::to_string(kMaxDegree));
    if (horizon_ <= 0) throw DomainError("BezierCurve: horizon must be positive");
  }

  BezierCurve(std::vector<R> control_points, double horizon)
      : BezierCurve(std::move(control_points), exact_rational(horizon)) {}

  int degree() const { return static_cast<int>(ctrl_.size()) - 1; }
  const std::vector<R>& control_points() const { return ctrl_; }
  const R& operator[](std::size_t j) const { return ctrl_[j]; }
  const Rational& horizon() const { return horizon_; }
  double horizon_seconds() const { return horizon_.get_d(); }

  /// de Casteljau evaluation at tau ∈ [0,1].
  R eval(const scalar& tau) const {
    if (tau < 0 || tau > 1) throw DomainError("eval: tau outside [0,1]");
    std::vector<R> b = ctrl_;
    const scalar one_minus = scalar(1) - tau;
    for (std::size_t level = 1; level < b.size(); ++level)
      for (std::size_t i = 0; i + level < b.size(); ++i) b[i] = b[i] * one_minus + b[i + 1] * tau;
    return b.front();
  }

  /// Evaluation at physical time t ∈ [0, T].
  R at_time(const scalar& t) const {
    scalar tau = t / ring_traits<R>::to_scalar(horizon_);
    if (tau < 0) tau = scalar(0);
    if (tau > 1) tau = scalar(1);
    return eval(tau);
  }

  /// Degree N+r representation of the same function.
  BezierCurve degree_elevate(int r) const {
    if (r < 1) throw DomainError("degree_elevate: r must be >= 1");
    const int n = degree();
    if (n + r > kMaxDegree) throw DomainError("degree_elevate: degree exceeds cap");
    std::vector<R> out;
    out.reserve(static_cast<std::size_t>(n + r + 1));
    for (int j = 0; j <= n + r; ++j) {
      const Rational denom(binomial(n + r, j));
      R acc = ring_traits<R>::zero();
      for (int i = std::max(0, j - r); i <= std::min(n, j); ++i) {
        Rational w(binomial(n, i) * binomial(r, j - i));
        w /= denom;
        acc = acc + ctrl_[static_cast<std::size_t>(i)] * ring_traits<R>::from_rational(w);
      }
      out.push_back(std::move(acc));
    }
    return BezierCurve(std::move(out), horizon_);
  }

  BezierCurve elevate_to(int target) const {
    if (target < degree()) throw DomainError("elevate_to: target below current degree");
    return target == degree() ? *this : degree_elevate(target - degree());
  }

  /// q-th time derivative, c_j^(q) = (N-q+1)/T * (c_{j+1}^(q-1) - c_j^(q-1)).
  BezierCurve derivative(int q = 1) const {
    if (q < 0) throw DomainError("derivative: negative order");
    if (q > degree())
      throw DomainError("derivative: order " + std::to_string(q) + " exceeds degree " +
                        std::to_string(degree()));
    std::vector<R> c = ctrl_;
    const int n = degree();
    for (int k = 1; k <= q; ++k) {
      Rational f(n - k + 1);
      f /= horizon_;
      const R factor = ring_traits<R>::from_rational(f);
      std::vector<R> next;
      next.reserve(c.size() - 1);
      for (std::size_t j = 0; j + 1 < c.size(); ++j) next.push_back((c[j + 1] - c[j]) * factor);
      c = std::move(next);
    }
    return BezierCurve(std::move(c), horizon_);
  }

  /// Δ₂c_j = c_{j-1} - 2c_j + c_{j+1} for j = 1..N-1.
  std::vector<R> second_differences() const {
    if (degree() < 2) throw DomainError("second_differences: degree must be >= 2");
    std::vector<R> d;
    d.reserve(ctrl_.size() - 2);
    for (std::size_t j = 1; j + 1 < ctrl_.size(); ++j)
      d.push_back(ctrl_[j - 1] - ctrl_[j] - ctrl_[j] + ctrl_[j + 1]);
    return d;
  }

  template <class F>
  auto map(F&& f) const -> BezierCurve<decltype(f(std::declval<const R&>()))> {
    using Out = decltype(f(std::declval<const R&>()));
    std::vector<Out> out;
    out.reserve(ctrl_.size());
    for (const auto& c : ctrl_) out.push_back(f(c));
    return BezierCurve<Out>(std::move(out), horizon_);
  }

  BezierCurve scaled(const R& k) const {
    std::vector<R> out;
    out.reserve(ctrl_.size());
    for (const auto& c : ctrl_) out.push_back(c * k);
    return BezierCurve(std::move(out), horizon_);
  }

  friend bool operator==(const BezierCurve& a, const BezierCurve& b) {
    return a.horizon_ == b.horizon_ && a.ctrl_ == b.ctrl_;
  }

 private:
  std::vector<R> ctrl_;
  Rational horizon_;
};

namespace detail {

template <class R>
void require_same_horizon(const BezierCurve<R>& f, const BezierCurve<R>& g, const char* op) {
  if (f.horizon() != g.horizon())
    throw DomainError(std::string(op) + ": curves have different horizons");
}

template <class R, class Combine>
BezierCurve<R> combine(const BezierCurve<R>& f, const BezierCurve<R>& g, Combine op) {
  const int n = std::max(f.degree(), g.degree());
  const auto fe = f.elevate_to(n), ge = g.elevate_to(n);
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) out.push_back(op(fe[j], ge[j]));
  return BezierCurve<R>(std::move(out), f.horizon());
}

}  // namespace detail

/// Sum; the lower-degree operand is elevated first.
template <class R>
BezierCurve<R> operator+(const BezierCurve<R>& f, const BezierCurve<R>& g) {
  detail::require_same_horizon(f, g, "add");
  return detail::combine(f, g, [](const R& a, const R& b) { return R(a + b); });
}

template <class R>
BezierCurve<R> operator-(const BezierCurve<R>& f, const BezierCurve<R>& g) {
  detail::require_same_horizon(f, g, "sub");
  return detail::combine(f, g, [](const R& a, const R& b) { return R(a - b); });
}

/// Product of degree m and n curves, degree m+n.
template <class R>
BezierCurve<R> operator*(const BezierCurve<R>& f, const BezierCurve<R>& g) {
  detail::require_same_horizon(f, g, "mul");
  const int m = f.degree(), n = g.degree();
  if (m + n > kMaxDegree) throw DomainError("mul: product degree exceeds cap");
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(m + n + 1));
  for (int j = 0; j <= m + n; ++j) {
    const Rational denom(binomial(m + n, j));
    R acc = ring_traits<R>::zero();
    for (int i = std::max(0, j - n); i <= std::min(m, j); ++i) {
      Rational w(binomial(m, i) * binomial(n, j - i));
      w /= denom;
      acc = acc + (f[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j - i)]) *
                      ring_traits<R>::from_rational(w);
    }
    out.push_back(std::move(acc));
  }
  return BezierCurve<R>(std::move(out), f.horizon());
}

/// Min-max bounding box (min_j c_j, max_j c_j); brackets the curve by the
/// convex-hull property.
template <class R>
std::pair<R, R> minmax_bounds(const BezierCurve<R>& curve) {
  const auto& c = curve.control_points();
  auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return {*lo, *hi};
}

/// Same function at degree N, with rational control points converted to double.
inline BezierCurve<double> to_double(const BezierCurve<Rational>& c) {
  return c.map([](const Rational& q) { return q.get_d(); });
}

}  // namespace flatbez
