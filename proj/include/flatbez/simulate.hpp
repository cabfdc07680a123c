#pragma once

#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "flatbez/bezier.hpp"
#include "flatbez/binomial.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/flat_models.hpp"

namespace flatbez {

using State = std::vector<double>;

/// Uniform grid t0, t0+h, ..., tf (last point snapped to tf).
struct TimeGrid {
  double t0 = 0.0;
  double tf = 1.0;
  double h = 1e-3;

  std::size_t steps() const {
    if (!(h > 0.0)) throw DomainError("time grid: step must be positive");
    if (!(tf > t0)) throw DomainError("time grid: tf must exceed t0");
    return static_cast<std::size_t>(std::llround((tf - t0) / h));
  }
  double at(std::size_t k) const { return k == steps() ? tf : t0 + h * static_cast<double>(k); }
  std::vector<double> times() const {
    std::vector<double> t;
    for (std::size_t k = 0, n = steps(); k <= n; ++k) t.push_back(at(k));
    return t;
  }
};

/// Named bound on one state or input channel; absent side means unbounded.
struct Limit {
  enum class Channel { State, Input };
  std::string name;
  Channel channel = Channel::Input;
  std::size_t index = 0;
  std::optional<double> lo;
  std::optional<double> hi;
  bool lo_strict = false;
  bool hi_strict = false;

  /// Signed margin; negative means violated. Strict sides treat 0 as violated.
  double slack(double v) const {
    double s = INFINITY;
    if (lo) s = std::min(s, v - *lo);
    if (hi) s = std::min(s, *hi - v);
    return s;
  }
  bool ok(double v) const {
    if (std::isnan(v)) return false;
    if (lo && (lo_strict ? !(v > *lo) : !(v >= *lo))) return false;
    if (hi && (hi_strict ? !(v < *hi) : !(v <= *hi))) return false;
    return true;
  }
};

struct Trajectory {
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  std::vector<double> times;
  std::vector<State> states;
  std::vector<State> inputs;
  std::vector<std::vector<std::string>> violations;

  std::size_t size() const { return times.size(); }
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Dynamics seen by the integrator: u = input(t, x), ẋ = rhs(t, x, u).
struct Dynamics {
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  std::function<State(double, const State&)> input;
  std::function<State(double, const State&, const State&)> rhs;
};

namespace detail {
inline State axpy(const State& x, double a, const State& k) {
  State r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * k[i];
  return r;
}
}  // namespace detail

inline std::vector<std::string> violated_limits(const std::vector<Limit>& limits, const State& x,
                                                const State& u) {
  std::vector<std::string> v;
  for (const auto& l : limits) {
    const auto& ch = l.channel == Limit::Channel::State ? x : u;
    if (l.index < ch.size() && !l.ok(ch[l.index])) v.push_back(l.name);
  }
  return v;
}

/// Classical fixed-step RK4; inputs and limit violations recorded per grid point.
inline Trajectory integrate(const Dynamics& dyn, State x0, const TimeGrid& grid,
                            const std::vector<Limit>& limits = {}) {
  const std::size_t n = grid.steps();
  Trajectory tr;
  tr.state_names = dyn.state_names;
  tr.input_names = dyn.input_names;
  tr.times.reserve(n + 1);
  State x = std::move(x0);
  auto f = [&](double t, const State& s) { return dyn.rhs(t, s, dyn.input(t, s)); };
  for (std::size_t k = 0;; ++k) {
    const double t = grid.at(k);
    const State u = dyn.input(t, x);
    for (double v : x)
      if (!std::isfinite(v)) throw IntegrationError("non-finite state", k);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.inputs.push_back(u);
    tr.violations.push_back(violated_limits(limits, x, u));
    if (k == n) break;
    const double h = grid.at(k + 1) - t;
    const State k1 = f(t, x);
    const State k2 = f(t + h / 2, detail::axpy(x, h / 2, k1));
    const State k3 = f(t + h / 2, detail::axpy(x, h / 2, k2));
    const State k4 = f(t + h, detail::axpy(x, h, k3));
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Stability of the error polynomial s^n + λ_{n-1}s^{n-1} + ... + λ_0.

/// Roots strictly in the left half-plane, by the Routh array.
inline bool hurwitz_stable(const std::vector<double>& lambdas) {
  // Coefficients in descending powers, leading 1.
  std::vector<double> c{1.0};
  for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) c.push_back(*it);
  const std::size_t n = c.size() - 1;
  const std::size_t width = n / 2 + 1;
  std::vector<double> prev(width + 1, 0.0), cur(width + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) (i % 2 ? cur : prev)[i / 2] = c[i];
  if (!(prev[0] > 0.0)) return false;
  for (std::size_t row = 1; row <= n; ++row) {
    if (!(cur[0] > 0.0)) return false;
    std::vector<double> next(width + 1, 0.0);
    for (std::size_t i = 0; i < width; ++i) next[i] = (cur[0] * prev[i + 1] - prev[0] * cur[i + 1]) / cur[0];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return true;
}

/// Gains λ_0..λ_{n-1} of (s + p)^n.
inline std::vector<double> repeated_pole_gains(int n, double pole) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k)
    out.push_back(static_cast<double>(binomial(n, k)) * std::pow(pole, n - k));
  return out;
}

// ---------------------------------------------------------------------------
// Vehicle.

enum class LoopMode { OpenLoop, ClosedLoop };

struct VehicleSimSettings {
  LoopMode mode = LoopMode::OpenLoop;
  double lambda = 9.0;
  double h = 1e-3;
  double v0_offset = 0.0;  ///< initial speed minus reference initial speed
};

/// Vehicle run along V_xr (time horizon from the curve). State [Vx], input [u].
inline Trajectory simulate_vehicle(const BezierCurve<double>& vxr, const VehicleParams& p,
                                   const VehicleSimSettings& s, const std::vector<Limit>& limits) {
  p.validate();
  const auto ur = vehicle_input_curve(vxr, p);
  const auto dv = vxr.derivative(1);
  const double M = p.mass(), r = p.radius(), Ca = p.drag();
  if (s.mode == LoopMode::ClosedLoop && !hurwitz_stable({s.lambda}))
    throw DomainError("vehicle: feedback gain must be positive for stable error dynamics");
  Dynamics d;
  d.state_names = {"Vx"};
  d.input_names = {"u"};
  if (s.mode == LoopMode::OpenLoop)
    d.input = [ur](double t, const State&) { return State{ur.at_time(t)}; };
  else
    d.input = [=](double t, const State& x) {
      return State{vehicle_closed_loop_input(x[0], vxr.at_time(t), dv.at_time(t), s.lambda, p)};
    };
  d.rhs = [=](double, const State& x, const State& u) {
    return State{(u[0] / r - Ca * x[0] * x[0]) / M};
  };
  const TimeGrid grid{0.0, vxr.horizon_seconds(), s.h};
  return integrate(d, State{vxr.eval(0.0) + s.v0_offset}, grid, limits);
}

// ---------------------------------------------------------------------------
// Quadrotor. State [x, ẋ, y, ẏ, z, ż, θ, θ̇, φ, φ̇, ψ, ψ̇], input [u1, u2, u3, u4].

inline const std::vector<std::string>& quad_state_names() {
  static const std::vector<std::string> n{"x",   "vx",      "y",   "vy",      "z",   "vz",
                                          "theta", "theta_d", "phi", "phi_d", "psi", "psi_d"};
  return n;
}

inline State quad_rhs(const QuadParams& q, const State& x, const State& u) {
  return State{x[1],
               x[6] * u[0] / q.m,
               x[3],
               -x[8] * u[0] / q.m,
               x[5],
               -q.g + u[0] / q.m,
               x[7],
               u[1] / q.Ix,
               x[9],
               u[2] / q.Iy,
               x[11],
               u[3] / q.Iz};
}

/// State matching the reference exactly at time t.
inline State quad_reference_state(const QuadReference& ref, double t) {
  const auto r = ref.at(t);
  return State{r.x[0], r.x[1], r.y[0],  r.y[1],  r.z[0],   r.z[1],
               r.theta, r.theta_d, r.phi, r.phi_d, r.psi[0], r.psi[1]};
}

struct QuadSimSettings {
  LoopMode mode = LoopMode::OpenLoop;
  double t0 = 0.0;
  double tf = 10.0;
  double h = 1e-3;
  /// Characteristic-polynomial gains λ_0..λ_3 per translational axis and λ_0..λ_1 for yaw.
  std::vector<double> translational_gains = repeated_pole_gains(4, 3.0);
  std::vector<double> yaw_gains = repeated_pole_gains(2, 3.0);
  /// Added to the exact initial state (12 entries, or empty).
  State ic_offset;
};

inline std::vector<Limit> quad_default_limits(const QuadParams& q) {
  using C = Limit::Channel;
  return {
      {"u1", C::Input, 0, 0.0, q.U1max, true, false},
      {"u2", C::Input, 1, -q.U2max, q.U2max, false, false},
      {"u3", C::Input, 2, -q.U3max, q.U3max, false, false},
      {"u4", C::Input, 3, -q.U4max, q.U4max, false, false},
      {"theta", C::State, 6, -q.ThetaMax, q.ThetaMax, false, false},
      {"phi", C::State, 8, -q.PhiMax, q.PhiMax, false, false},
  };
}

/// Open loop applies the flat feedforward (u1r..u4r). Closed loop uses
/// dynamic extension of the thrust (u1 and u̇1 become compensator states) so
/// that x⁽⁴⁾, y⁽⁴⁾, z⁽⁴⁾ are assigned through the linear error dynamics, and a
/// second-order law on ψ. The reported state is the 12 physical states.
inline Trajectory simulate_quadrotor(const QuadReference& ref, const QuadSimSettings& s,
                                     const std::vector<Limit>& limits) {
  const QuadParams& q = ref.params();
  const TimeGrid grid{s.t0, s.tf, s.h};
  State x0 = quad_reference_state(ref, s.t0);
  if (!s.ic_offset.empty()) {
    if (s.ic_offset.size() != x0.size()) throw DomainError("quadrotor: ic_offset needs 12 entries");
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += s.ic_offset[i];
  }
  Dynamics d;
  d.input_names = {"u1", "u2", "u3", "u4"};

  if (s.mode == LoopMode::OpenLoop) {
    d.state_names = quad_state_names();
    d.input = [&ref](double t, const State&) {
      const auto r = ref.at(t);
      return State{r.u1, r.u2, r.u3, r.u4};
    };
    d.rhs = [q](double, const State& x, const State& u) { return quad_rhs(q, x, u); };
    return integrate(d, x0, grid, limits);
  }

  const auto& L = s.translational_gains;
  const auto& Ly = s.yaw_gains;
  if (L.size() != 4 || Ly.size() != 2)
    throw DomainError("quadrotor: need 4 translational and 2 yaw gains");
  if (!hurwitz_stable(L) || !hurwitz_stable(Ly))
    throw DomainError("quadrotor: gains do not give Hurwitz error dynamics");

  // Augmented state: 12 physical + [u1, u̇1].
  auto law = [&ref, q, L, Ly](double t, const State& x) {
    const auto r = ref.at(t);
    const double u1 = x[12], u1d = x[13];
    if (!(u1 > 0.0)) throw SingularityError("quadrotor closed loop: thrust reached zero");
    // Flat-output derivatives up to order 3 from the state.
    const double xs[4] = {x[0], x[1], x[6] * u1 / q.m, (x[7] * u1 + x[6] * u1d) / q.m};
    const double ys[4] = {x[2], x[3], -x[8] * u1 / q.m, -(x[9] * u1 + x[8] * u1d) / q.m};
    const double zs[4] = {x[4], x[5], u1 / q.m - q.g, u1d / q.m};
    auto v = [&L](const double* ref_d, const double* act) {
      double out = ref_d[4];
      for (int i = 0; i < 4; ++i) out -= L[static_cast<std::size_t>(i)] * (act[i] - ref_d[i]);
      return out;
    };
    const double vx = v(r.x, xs), vy = v(r.y, ys), vz = v(r.z, zs);
    const double w = q.m * vz;  // ü1
    const double u2 = q.Ix * (q.m * vx - 2.0 * x[7] * u1d - x[6] * w) / u1;
    const double u3 = q.Iy * (-q.m * vy - 2.0 * x[9] * u1d - x[8] * w) / u1;
    const double u4 =
        q.Iz * (r.psi[2] - Ly[1] * (x[11] - r.psi[1]) - Ly[0] * (x[10] - r.psi[0]));
    return State{u1, u2, u3, u4, w};
  };
  d.state_names = quad_state_names();
  d.state_names.push_back("u1_state");
  d.state_names.push_back("u1_rate");
  d.input = [law](double t, const State& x) { return law(t, x); };
  d.rhs = [q](double, const State& x, const State& u) {
    State dx = quad_rhs(q, State(x.begin(), x.begin() + 12), u);
    dx.push_back(x[13]);
    dx.push_back(u[4]);
    return dx;
  };
  const auto r0 = ref.at(s.t0);
  x0.push_back(r0.u1);
  x0.push_back(q.m * r0.z[3]);
  Trajectory tr = integrate(d, x0, grid, limits);
  tr.state_names.resize(12);
  for (auto& st : tr.states) st.resize(12);
  for (auto& u : tr.inputs) u.resize(4);
  return tr;
}

// ---------------------------------------------------------------------------

struct AuditEntry {
  std::string name;
  double first_violation_time = 0.0;
  double worst_slack = 0.0;
  double duration = 0.0;
  std::size_t samples = 0;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool compliant() const { return entries.empty(); }
};

/// Summarises every limit violated along the trajectory.
inline AuditReport audit(const Trajectory& tr, const std::vector<Limit>& limits) {
  AuditReport rep;
  const double h = tr.size() > 1 ? tr.times[1] - tr.times[0] : 0.0;
  for (const auto& l : limits) {
    AuditEntry e{l.name, 0.0, INFINITY, 0.0, 0};
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const auto& ch = l.channel == Limit::Channel::State ? tr.states[k] : tr.inputs[k];
      if (l.index >= ch.size()) continue;
      const double v = ch[l.index];
      if (l.ok(v)) continue;
      if (e.samples == 0) e.first_violation_time = tr.times[k];
      ++e.samples;
      e.worst_slack = std::min(e.worst_slack, std::isnan(v) ? -INFINITY : l.slack(v));
    }
    if (e.samples) {
      e.duration = static_cast<double>(e.samples) * h;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

/// CSV: t, states..., inputs..., violations (';'-joined names).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t";
  for (const auto& n : tr.state_names) os << ',' << n;
  for (const auto& n : tr.input_names) os << ',' << n;
  os << ",violations\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << format_double(tr.times[k]);
    for (double v : tr.states[k]) os << ',' << format_double(v);
    for (double v : tr.inputs[k]) os << ',' << format_double(v);
    os << ',';
    for (std::size_t i = 0; i < tr.violations[k].size(); ++i)
      os << (i ? ";" : "") << tr.violations[k][i];
    os << '\n';
  }
}

}  // namespace flatbez
