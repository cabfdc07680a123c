#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "flatbez/bezier.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/numeric.hpp"
#include "flatbez/poly.hpp"
#include "flatbez/rational.hpp"

namespace flatbez {

// ---------------------------------------------------------------------------
// Vehicle longitudinal dynamics: M V̇ = u/r − Ca V², flat output V.

/// Exact parameters so the symbolic pipeline stays coefficient-exact.
/// Defaults satisfy rM/T = 1 and rCa = 1.
struct VehicleParams {
  Rational M{5, 2};
  Rational r{2, 5};
  Rational Ca{5, 2};
  Rational T{1};

  void validate() const {
    if (M <= 0 || r <= 0 || Ca <= 0 || T <= 0)
      throw ConfigError("vehicle parameters M, r, Ca, T must be strictly positive");
  }
  double mass() const { return M.get_d(); }
  double radius() const { return r.get_d(); }
  double drag() const { return Ca.get_d(); }
};

/// Open-loop input u_r = r(M V̇_r + Ca V_r²) as a Bézier curve of degree 2N.
template <class R>
BezierCurve<R> vehicle_input_curve(const BezierCurve<R>& vxr, const VehicleParams& p) {
  p.validate();
  if (vxr.degree() < 2)
    throw DomainError("vehicle_input_curve: reference degree must be >= 2 for a continuous input");
  const int n = vxr.degree();
  const R rM = ring_traits<R>::from_rational(Rational(p.r * p.M));
  const R rCa = ring_traits<R>::from_rational(Rational(p.r * p.Ca));
  auto accel = vxr.derivative(1).elevate_to(2 * n).scaled(rM);
  auto drag = (vxr * vxr).scaled(rCa);
  return accel + drag;
}

/// u = M r (V̇_r − λ(V − V_r)) + r Ca V².
inline double vehicle_closed_loop_input(double vx, double vxr, double vxr_dot, double lambda,
                                        const VehicleParams& p) {
  const double Mr = p.mass() * p.radius();
  return Mr * (vxr_dot - lambda * (vx - vxr)) + p.radius() * p.drag() * vx * vx;
}

// ---------------------------------------------------------------------------
// tanh altitude profile z_r(t) = C (1 + tanh(γ(t − t_m))) + H_i, C = (H_f − H_i)/2.

struct Sigmoid {
  double Hi = 0.0;
  double Hf = 2.0;
  double gamma = 2.0;
  double tm = 5.0;

  double C() const { return 0.5 * (Hf - Hi); }

  void validate() const {
    if (Hf == Hi) throw ConfigError("sigmoid: Hf must differ from Hi");
    if (!(gamma > 0.0)) throw ConfigError("sigmoid: gamma must be positive");
  }

  /// Closed-form derivative of order 0..4 through the R = tanh recursion.
  double eval(double t, int order = 0) const {
    const double R = std::tanh(gamma * (t - tm)), c = C(), s = 1.0 - R * R;
    switch (order) {
      case 0: return c * (1.0 + R) + Hi;
      case 1: return gamma * c * s;
      case 2: return -2.0 * gamma * gamma * c * R * s;
      case 3: return -2.0 * gamma * gamma * gamma * c * s * (1.0 - 3.0 * R * R);
      case 4: {
        const double g4 = gamma * gamma * gamma * gamma;
        return 8.0 * g4 * c * R * (3.0 * R * R * R * R - 5.0 * R * R + 2.0);
      }
      default: throw DomainError("sigmoid: derivative order must be in 0..4");
    }
  }
};

/// Shape constants of the tanh derivatives, normalised by γ^k C.
struct SigmoidConstants {
  double b1;     ///< max of (1 − R²)
  double b2;     ///< max of |2R(1 − R²)|, closed form 4√3/9
  double b3_lo;  ///< −min of −2(1 − R²)(1 − 3R²), closed form 2
  double b3_hi;  ///< max of −2(1 − R²)(1 − 3R²), closed form 2/3
  double b4;     ///< max of |8R(3R⁴ − 5R² + 2)|, ≈ 4.0859
};

/// Computed once by numeric maximisation over R ∈ [−1, 1].
inline const SigmoidConstants& sigmoid_constants() {
  static const SigmoidConstants k = [] {
    SigmoidConstants c{};
    c.b1 = maximize([](double R) { return 1.0 - R * R; }, -1.0, 1.0).value;
    c.b2 = maximize([](double R) { return std::fabs(2.0 * R * (1.0 - R * R)); }, -1.0, 1.0).value;
    auto third = [](double R) { return -2.0 * (1.0 - R * R) * (1.0 - 3.0 * R * R); };
    c.b3_lo = -minimize(third, -1.0, 1.0).value;
    c.b3_hi = maximize(third, -1.0, 1.0).value;
    c.b4 = maximize(
               [](double R) {
                 const double R2 = R * R;
                 return std::fabs(8.0 * R * (3.0 * R2 * R2 - 5.0 * R2 + 2.0));
               },
               -1.0, 1.0)
               .value;
    return c;
  }();
  return k;
}

/// Tight bounds of the order-th derivative over all t.
inline std::pair<double, double> sigmoid_bounds(const Sigmoid& s, int order) {
  const auto& k = sigmoid_constants();
  const double c = s.C(), g = s.gamma;
  auto sorted = [](double a, double b) { return a <= b ? std::pair{a, b} : std::pair{b, a}; };
  switch (order) {
    case 0: return sorted(s.Hi, s.Hf);
    case 1: return sorted(0.0, k.b1 * g * c);
    case 2: return sorted(-k.b2 * g * g * c, k.b2 * g * g * c);
    case 3: return sorted(-k.b3_lo * g * g * g * c, k.b3_hi * g * g * g * c);
    case 4: {
      const double g4 = g * g * g * g;
      return sorted(-k.b4 * g4 * c, k.b4 * g4 * c);
    }
    default: throw DomainError("sigmoid_bounds: order must be in 0..4");
  }
}

// ---------------------------------------------------------------------------
// Simplified quadrotor: m ẍ = θ u1, m ÿ = −φ u1, m z̈ = −m g + u1,
// Ix θ̈ = u2, Iy φ̈ = u3, Iz ψ̈ = u4. Flat output (x, y, z, ψ).

struct QuadParams {
  double m = 0.53;
  double g = 9.8;
  double Ix = 6.22e-3;
  double Iy = 6.22e-3;
  double Iz = 1.12e-2;
  double U1max = 4.0 * 0.53 * 9.8;
  double ThetaMax = 0.25;
  double PhiMax = 0.25;
  double U2max = 0.3;
  double U3max = 0.3;
  double U4max = 0.5;

  void validate() const {
    if (!(m > 0 && g > 0 && Ix > 0 && Iy > 0 && Iz > 0))
      throw ConfigError("quadrotor: m, g and inertias must be strictly positive");
    if (!(U1max > 0)) throw ConfigError("quadrotor: U1max must be positive");
  }
};

/// Per-sample names of violated limits.
using SampleFlags = std::vector<std::vector<std::string>>;

struct ThrustSeries {
  std::vector<double> times;
  std::vector<double> u1;
  double bound_lo = 0.0;  ///< m(g − b2 γ² |C|)
  double bound_hi = 0.0;  ///< m(g + b2 γ² |C|)
  bool bound_within_limits = false;
  SampleFlags flags;

  bool any_violation() const {
    for (const auto& f : flags)
      if (!f.empty()) return true;
    return false;
  }
  double max() const {
    double v = -INFINITY;
    for (double x : u1) v = std::max(v, x);
    return v;
  }
};

/// u1r = m(z̈_r + g) sampled on the grid, flagged against 0 < u1 ≤ U1max.
inline ThrustSeries quad_thrust_curve(const Sigmoid& s, const QuadParams& q,
                                      const std::vector<double>& times) {
  s.validate();
  q.validate();
  ThrustSeries out;
  out.times = times;
  const double swing = sigmoid_constants().b2 * s.gamma * s.gamma * std::fabs(s.C());
  out.bound_lo = q.m * (q.g - swing);
  out.bound_hi = q.m * (q.g + swing);
  out.bound_within_limits = out.bound_lo > 0.0 && out.bound_hi <= q.U1max;
  out.u1.reserve(times.size());
  out.flags.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double u = q.m * (s.eval(times[i], 2) + q.g);
    out.u1.push_back(u);
    if (!(u > 0.0 && u <= q.U1max)) out.flags[i].push_back("u1");
  }
  return out;
}

/// Largest admissible γ²|C| so that the thrust bounds stay inside (0, U1max].
inline double quad_gamma_sq_c_limit(const QuadParams& q) {
  const double b2 = sigmoid_constants().b2;
  return std::min((q.U1max / q.m - q.g) / b2, q.g / b2);
}

struct TiltBound {
  double lo;
  double hi;
};

enum class Axis { X, Y };

namespace detail {
inline double thrust_swing(const Sigmoid& s, const QuadParams& q) {
  const double swing = sigmoid_constants().b2 * s.gamma * s.gamma * std::fabs(s.C());
  if (swing >= q.g)
    throw SingularityError("tilt bound: b2·γ²·C >= g, thrust may vanish");
  return swing;
}
}  // namespace detail

/// Acceleration window (X^min, X^max) = (−(b2γ²C + g)Θ, (g − b2γ²C)Θ) for the
/// x axis. For Y the window applies to ÿ with φ = −ÿ/(z̈+g), i.e. it is
/// reflected.
inline TiltBound quad_tilt_bound(const Sigmoid& s, const QuadParams& q, Axis axis = Axis::X) {
  const double swing = detail::thrust_swing(s, q);
  const double lim = axis == Axis::X ? q.ThetaMax : q.PhiMax;
  const TiltBound b{-(swing + q.g) * lim, (q.g - swing) * lim};
  return axis == Axis::X ? b : TiltBound{-b.hi, -b.lo};
}

/// Symmetric window ±(g − b2γ²C)Θ: every ẍ inside it keeps |θ| ≤ Θ whatever
/// the sigmoid phase, since z̈ + g never drops below g − b2γ²C.
inline TiltBound quad_tilt_bound_certified(const Sigmoid& s, const QuadParams& q,
                                           Axis axis = Axis::X) {
  const double swing = detail::thrust_swing(s, q);
  const double lim = axis == Axis::X ? q.ThetaMax : q.PhiMax;
  return {-(q.g - swing) * lim, (q.g - swing) * lim};
}

/// Every flat-output derivative and derived reference at one time instant.
struct QuadRefSample {
  double x[5], y[5], z[5], psi[3];
  double theta, theta_d, theta_dd;
  double phi, phi_d, phi_dd;
  double u1, u2, u3, u4;
};

/// Flat-output references with their analytic derivative curves; evaluating
/// never differentiates numerically.
class QuadReference {
 public:
  QuadReference(BezierCurve<double> x, BezierCurve<double> y, Sigmoid z, BezierCurve<double> psi,
                QuadParams q)
      : z_(z), q_(q) {
    z_.validate();
    q_.validate();
    if (x.degree() < 4 || y.degree() < 4)
      throw DomainError("quadrotor reference: x_r and y_r need degree >= 4");
    if (psi.degree() < 2) throw DomainError("quadrotor reference: psi_r needs degree >= 2");
    for (int k = 0; k <= 4; ++k) {
      dx_.push_back(x.derivative(k));
      dy_.push_back(y.derivative(k));
    }
    for (int k = 0; k <= 2; ++k) dpsi_.push_back(psi.derivative(k));
  }

  const Sigmoid& altitude() const { return z_; }
  const QuadParams& params() const { return q_; }
  const BezierCurve<double>& x(int k = 0) const { return dx_.at(static_cast<std::size_t>(k)); }
  const BezierCurve<double>& y(int k = 0) const { return dy_.at(static_cast<std::size_t>(k)); }
  const BezierCurve<double>& psi(int k = 0) const { return dpsi_.at(static_cast<std::size_t>(k)); }

  QuadRefSample at(double t) const {
    QuadRefSample s{};
    for (int k = 0; k <= 4; ++k) {
      s.x[k] = dx_[static_cast<std::size_t>(k)].at_time(t);
      s.y[k] = dy_[static_cast<std::size_t>(k)].at_time(t);
      s.z[k] = z_.eval(t, k);
    }
    for (int k = 0; k <= 2; ++k) s.psi[k] = dpsi_[static_cast<std::size_t>(k)].at_time(t);
    const double w = s.z[2] + q_.g;
    if (!(w > 0.0))
      throw SingularityError("quadrotor reference: z'' + g <= 0 at t = " + format_double(t));
    const double w3 = s.z[3], w4 = s.z[4];
    auto ratio = [&](const double* a, double sign, double& v, double& d, double& dd) {
      v = sign * a[2] / w;
      d = sign * (a[3] / w - a[2] * w3 / (w * w));
      dd = sign * (a[4] / w - 2.0 * a[3] * w3 / (w * w) - a[2] * w4 / (w * w) +
                   2.0 * a[2] * w3 * w3 / (w * w * w));
    };
    ratio(s.x, 1.0, s.theta, s.theta_d, s.theta_dd);
    ratio(s.y, -1.0, s.phi, s.phi_d, s.phi_dd);
    s.u1 = q_.m * w;
    s.u2 = q_.Ix * s.theta_dd;
    s.u3 = q_.Iy * s.phi_dd;
    s.u4 = q_.Iz * s.psi[2];
    return s;
  }

 private:
  std::vector<BezierCurve<double>> dx_, dy_, dpsi_;
  Sigmoid z_;
  QuadParams q_;
};

struct AngleSeries {
  std::vector<double> times, theta, phi;
  SampleFlags flags;
  double max_abs_theta() const {
    double v = 0;
    for (double x : theta) v = std::max(v, std::fabs(x));
    return v;
  }
};

namespace detail {
inline void require_positive_thrust(const Sigmoid& s, const QuadParams& q) {
  if (sigmoid_bounds(s, 2).first + q.g <= 0.0)
    throw SingularityError("quadrotor: z'' + g can reach zero for this sigmoid");
}
}  // namespace detail

/// θ_r = ẍ_r/(z̈_r + g), φ_r = −ÿ_r/(z̈_r + g) sampled; flags tilt-limit breaches.
inline AngleSeries quad_angle_refs(const BezierCurve<double>& x_r, const BezierCurve<double>& y_r,
                                   const Sigmoid& s, const QuadParams& q,
                                   const std::vector<double>& times) {
  detail::require_positive_thrust(s, q);
  const auto ax = x_r.derivative(2), ay = y_r.derivative(2);
  AngleSeries out;
  out.times = times;
  out.flags.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double w = s.eval(times[i], 2) + q.g;
    if (!(w > 0.0))
      throw SingularityError("quadrotor: z'' + g <= 0 at t = " + format_double(times[i]));
    const double th = ax.at_time(times[i]) / w, ph = -ay.at_time(times[i]) / w;
    out.theta.push_back(th);
    out.phi.push_back(ph);
    if (std::fabs(th) > q.ThetaMax) out.flags[i].push_back("theta");
    if (std::fabs(ph) > q.PhiMax) out.flags[i].push_back("phi");
  }
  return out;
}

struct TorqueSeries {
  std::vector<double> times, u2, u3, u4;
  SampleFlags flags;
};

/// u2r = Ix θ̈_r, u3r = Iy φ̈_r, u4r = Iz ψ̈_r via the quotient-rule expansion.
inline TorqueSeries quad_torque_refs(const BezierCurve<double>& x_r,
                                     const BezierCurve<double>& y_r,
                                     const BezierCurve<double>& psi_r, const Sigmoid& s,
                                     const QuadParams& q, const std::vector<double>& times) {
  detail::require_positive_thrust(s, q);
  QuadReference ref(x_r, y_r, s, psi_r, q);
  TorqueSeries out;
  out.times = times;
  out.flags.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto r = ref.at(times[i]);
    out.u2.push_back(r.u2);
    out.u3.push_back(r.u3);
    out.u4.push_back(r.u4);
    if (std::fabs(r.u2) > q.U2max) out.flags[i].push_back("u2");
    if (std::fabs(r.u3) > q.U3max) out.flags[i].push_back("u3");
    if (std::fabs(r.u4) > q.U4max) out.flags[i].push_back("u4");
  }
  return out;
}

/// Hover-mode torque u2r = (Ix/g) x_r⁽⁴⁾ (or u3r = −(Iy/g) y_r⁽⁴⁾) as a
/// symbolic curve, linear in the control-point parameters.
inline BezierCurve<PolyExpr> quad_hover_torque_sym(const BezierCurve<PolyExpr>& curve,
                                                   const QuadParams& q, Axis axis = Axis::X) {
  if (curve.degree() < 4) throw DomainError("hover torque: reference degree must be >= 4");
  Rational k = axis == Axis::X ? decimal_rational(q.Ix) / decimal_rational(q.g)
                               : Rational(-decimal_rational(q.Iy) / decimal_rational(q.g));
  return curve.derivative(4).scaled(PolyExpr(k));
}

/// u4r = Iz ψ̈_r as a symbolic curve.
inline BezierCurve<PolyExpr> quad_yaw_torque_sym(const BezierCurve<PolyExpr>& psi,
                                                 const QuadParams& q) {
  if (psi.degree() < 2) throw DomainError("yaw torque: reference degree must be >= 2");
  return psi.derivative(2).scaled(PolyExpr(decimal_rational(q.Iz)));
}

}  // namespace flatbez
