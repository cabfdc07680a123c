#include <gtest/gtest.h>

#include "support.hpp"

using namespace flatbez;

namespace {

PolyExpr p(const char* s) { return parse_poly(s); }

std::vector<double> time_grid(double t0, double tf, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t0 + (tf - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

BezierCurve<double> scenario_x() { return BezierCurve<double>({0, 0, 0, 8, 12.5, 9, 2, 2, 2}, 10.0); }

}  // namespace

TEST(Vehicle, InputCurveReproducesNinePolynomials) {
  auto vxr = symbolic_curve({"0", "a1", "a2", "a3", "1"}, Rational(1));
  auto u = vehicle_input_curve(vxr, VehicleParams{});
  const std::vector<PolyExpr> expect{
      p("4*a1"),
      p("a1 + 3/2*a2"),
      p("4/7*a1^2 - 5/7*a1 + 12/7*a2 + 3/7*a3"),
      p("15/14*a2 - 10/7*a1 + a3 + 6/7*a1*a2 + 1/14"),
      p("18/35*a2^2 - 10/7*a1 + 10/7*a3 + 16/35*a1*a3 + 2/7"),
      p("10/7*a3 - 15/14*a2 - 6/7*a1 + 6/7*a2*a3 + 5/7"),
      p("4/7*a3^2 + 5/7*a3 - 3/7*a1 - 9/7*a2 + 10/7"),
      p("5/2 - 3/2*a2"),
      p("5 - 4*a3")};
  ASSERT_EQ(u.degree(), 8);
  for (std::size_t j = 0; j < expect.size(); ++j) EXPECT_EQ(u[j], expect[j]) << j << ": " << u[j].render();
}

TEST(Vehicle, NumericEndpointValues) {
  auto u = substitute(vehicle_input_curve(symbolic_curve({"0", "a1", "a2", "a3", "1"}, Rational(1)), VehicleParams{}),
                      {{"a1", 2}, {"a2", parse_rational("2.3")}, {"a3", parse_rational("1.2")}});
  EXPECT_EQ(u[0], 8);
  EXPECT_EQ(u[8], Rational(1, 5));
}

TEST(Vehicle, ZeroReferenceGivesZeroInput) {
  auto u = vehicle_input_curve(BezierCurve<double>({0.0, 0.0, 0.0}), VehicleParams{});
  for (double c : u.control_points()) EXPECT_EQ(c, 0.0);
}

TEST(Vehicle, RejectsLowDegreeAndBadParams) {
  EXPECT_THROW(vehicle_input_curve(BezierCurve<double>({0.0, 1.0}), VehicleParams{}), DomainError);
  VehicleParams bad;
  bad.M = 0;
  EXPECT_THROW(vehicle_input_curve(BezierCurve<double>({0.0, 1.0, 2.0}), bad), ConfigError);
}

TEST(Vehicle, FlatnessResidualExactInRationals) {
  std::mt19937_64 rng(31);
  VehicleParams vp;
  vp.M = Rational(7, 3);
  vp.r = Rational(3, 10);
  vp.Ca = Rational(11, 5);
  for (int i = 0; i < 20; ++i) {
    BezierCurve<Rational> v(test::random_rationals(rng, 2 + i % 6), Rational(3, 2));
    auto u = vehicle_input_curve(v, vp);
    auto vd = v.derivative(1);
    for (int k = 0; k <= 100; ++k) {
      Rational tau(k, 100);
      tau.canonicalize();
      const Rational vv = v.eval(tau);
      EXPECT_EQ(vp.M * vd.eval(tau) - u.eval(tau) / vp.r + vp.Ca * vv * vv, 0);
    }
  }
}

TEST(Vehicle, FlatnessResidualFloat) {
  std::mt19937_64 rng(32);
  VehicleParams vp;
  for (int i = 0; i < 100; ++i) {
    BezierCurve<double> v(test::random_points(rng, 2 + i % 8, 0.0, 3.0), 2.0);
    auto u = vehicle_input_curve(v, vp);
    auto vd = v.derivative(1);
    for (double tau : test::grid(101)) {
      const double vv = v.eval(tau);
      EXPECT_NEAR(vp.mass() * vd.eval(tau) - u.eval(tau) / vp.radius() + vp.drag() * vv * vv, 0.0, 1e-10);
    }
  }
}

TEST(Vehicle, ClosedLoopInput) {
  VehicleParams vp;
  const double Mr = vp.mass() * vp.radius(), rCa = vp.radius() * vp.drag();
  EXPECT_DOUBLE_EQ(vehicle_closed_loop_input(1.5, 1.5, 0.0, 9.0, vp), rCa * 1.5 * 1.5);
  EXPECT_NEAR(vehicle_closed_loop_input(1.0, 1.1, 0.0, 9.0, vp), Mr * 0.9 + rCa, 1e-12);
  const double ff = vehicle_closed_loop_input(2.0, 2.0, 0.3, 9.0, vp);
  const double fb = vehicle_closed_loop_input(2.1, 2.0, 0.3, 9.0, vp);
  EXPECT_NEAR(fb - (ff + rCa * (2.1 * 2.1 - 4.0)), -Mr * 9.0 * 0.1, 1e-12);
}

TEST(Sigmoid, ClosedFormValues) {
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  EXPECT_DOUBLE_EQ(s.eval(5.0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.eval(5.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(s.eval(5.0, 1), 2.0);
  EXPECT_THROW(s.eval(5.0, 5), DomainError);
}

TEST(Sigmoid, DerivativesMatchFiniteDifferencesOfLowerOrder) {
  // Independent of the recursion: central differences of tanh itself.
  const double g = 1.7, C = 1.3, tm = 4.0, Hi = 0.5;
  Sigmoid s{Hi, Hi + 2 * C, g, tm};
  auto z = [&](double t) { return C * (1 + std::tanh(g * (t - tm))) + Hi; };
  const double h = 1e-3;
  for (double t = 2.0; t <= 6.0; t += 0.137) {
    const double d1 = (z(t + h) - z(t - h)) / (2 * h);
    const double d2 = (z(t + h) - 2 * z(t) + z(t - h)) / (h * h);
    const double d3 = (z(t + 2 * h) - 2 * z(t + h) + 2 * z(t - h) - z(t - 2 * h)) / (2 * h * h * h);
    EXPECT_NEAR(s.eval(t, 0), z(t), 1e-14);
    EXPECT_NEAR(s.eval(t, 1), d1, 1e-5);
    EXPECT_NEAR(s.eval(t, 2), d2, 1e-4);
    EXPECT_NEAR(s.eval(t, 3), d3, 1e-3);
    const double h4 = 1e-2;
    const double d4 = (s.eval(t + h4, 2) - 2 * s.eval(t, 2) + s.eval(t - h4, 2)) / (h4 * h4);
    EXPECT_NEAR(s.eval(t, 4), d4, 2e-3 * (1 + std::fabs(d4)));
  }
}

TEST(Sigmoid, ShapeConstants) {
  const auto& k = sigmoid_constants();
  EXPECT_NEAR(k.b1, 1.0, 1e-12);
  EXPECT_NEAR(k.b2, 4.0 * std::sqrt(3.0) / 9.0, 1e-9);
  EXPECT_NEAR(k.b3_lo, 2.0, 1e-9);
  EXPECT_NEAR(k.b3_hi, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(k.b4, 4.0849, 2e-3);
}

TEST(Sigmoid, BoundExamples) {
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  auto [lo2, hi2] = sigmoid_bounds(s, 2);
  EXPECT_NEAR(lo2, -3.0792, 1e-4);
  EXPECT_NEAR(hi2, 3.0792, 1e-4);
  Sigmoid unit{0.0, 2.0, 1.0, 0.0};
  auto [lo3, hi3] = sigmoid_bounds(unit, 3);
  EXPECT_NEAR(lo3, -2.0, 1e-9);
  EXPECT_NEAR(hi3, 2.0 / 3.0, 1e-9);
  EXPECT_EQ(sigmoid_bounds(s, 0), std::make_pair(0.0, 2.0));
  EXPECT_THROW(sigmoid_bounds(s, 5), DomainError);
}

TEST(Sigmoid, BoundsAreTightOverTime) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> G(0.3, 4.0), Cd(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    double C = Cd(rng);
    if (std::fabs(C) < 0.1) C = 0.5;
    Sigmoid s{1.0, 1.0 + 2 * C, G(rng), 3.0};
    for (int order = 1; order <= 4; ++order) {
      auto [lo, hi] = sigmoid_bounds(s, order);
      const double a = s.tm - 12.0 / s.gamma, b = s.tm + 12.0 / s.gamma;
      const double mx = maximize([&](double t) { return s.eval(t, order); }, a, b, 20000).value;
      const double mn = minimize([&](double t) { return s.eval(t, order); }, a, b, 20000).value;
      const double scale = std::pow(s.gamma, order) * std::fabs(C);
      EXPECT_NEAR(mx, hi, 1e-3 * scale) << "order " << order;
      EXPECT_NEAR(mn, lo, 1e-3 * scale) << "order " << order;
    }
  }
}

TEST(Quad, ThrustNominalWithinLimit) {
  QuadParams q;
  auto th = quad_thrust_curve(Sigmoid{0.0, 2.0, 2.0, 5.0}, q, time_grid(0, 10, 10001));
  EXPECT_FALSE(th.any_violation());
  EXPECT_TRUE(th.bound_within_limits);
  EXPECT_LE(th.max(), 6.83);
  EXPECT_NEAR(th.bound_hi, 6.826, 1e-3);
}

TEST(Quad, ThrustGammaSevenFlagged) {
  QuadParams q;
  auto th = quad_thrust_curve(Sigmoid{0.0, 2.0, 7.0, 5.0}, q, time_grid(0, 10, 10001));
  EXPECT_TRUE(th.any_violation());
  EXPECT_FALSE(th.bound_within_limits);
  EXPECT_NEAR(th.bound_hi, 25.19, 1e-2);
  EXPECT_GT(th.bound_hi, q.U1max);
}

TEST(Quad, GammaThresholdKeepsThrustAdmissible) {
  QuadParams q;
  const double lim = quad_gamma_sq_c_limit(q);
  for (double f : {0.1, 0.5, 0.9, 0.99}) {
    const double gamma = std::sqrt(f * lim);
    auto th = quad_thrust_curve(Sigmoid{0.0, 2.0, gamma, 5.0}, q, time_grid(0, 10, 5001));
    EXPECT_FALSE(th.any_violation()) << f;
    EXPECT_TRUE(th.bound_within_limits) << f;
  }
}

TEST(Quad, TiltBoundExamples) {
  QuadParams q;
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  auto b = quad_tilt_bound(s, q);
  EXPECT_NEAR(b.lo, -3.2198, 1e-4);
  EXPECT_NEAR(b.hi, 1.6802, 1e-4);
  QuadParams flat = q;
  flat.ThetaMax = 0.0;
  auto z = quad_tilt_bound(s, flat);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_EQ(z.hi, 0.0);
  auto tiny = quad_tilt_bound(Sigmoid{0.0, 2.0, 1e-6, 5.0}, q);
  EXPECT_NEAR(tiny.lo, -2.45, 1e-9);
  EXPECT_NEAR(tiny.hi, 2.45, 1e-9);
  auto y = quad_tilt_bound(s, q, Axis::Y);
  EXPECT_DOUBLE_EQ(y.lo, -b.hi);
  EXPECT_DOUBLE_EQ(y.hi, -b.lo);
  EXPECT_THROW(quad_tilt_bound(Sigmoid{0.0, 2.0, 7.0, 5.0}, q), SingularityError);
}

TEST(Quad, CertifiedTiltBoundGuaranteesAngle) {
  QuadParams q;
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  const auto cb = quad_tilt_bound_certified(s, q);
  const auto times = time_grid(0, 10, 2001);
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> fill(0.3, 1.0);
  for (int i = 0; i < 100; ++i) {
    BezierCurve<double> raw(test::random_points(rng, 8, -5.0, 15.0), 10.0);
    double peak = 0.0;
    for (double t : times) peak = std::max(peak, std::fabs(raw.derivative(2).at_time(t)));
    // Scaled so the sampled acceleration fills part of the certified window.
    BezierCurve<double> x = raw.scaled(fill(rng) * cb.hi / peak);
    auto ang = quad_angle_refs(x, x, s, q, times);
    EXPECT_LE(ang.max_abs_theta(), q.ThetaMax + 1e-12) << i;
  }
}

TEST(Quad, NominalTiltBoundIsNotConservative) {
  // Strong braking late in the climb, where z'' + g is smallest.
  QuadParams q;
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  const auto nb = quad_tilt_bound(s, q);
  const double t_low = minimize([&](double t) { return s.eval(t, 2); }, 0.0, 10.0).x;
  const double a = 0.95 * nb.lo;  // constant deceleration inside the nominal window
  BezierCurve<double> xr = BezierCurve<double>({0.0, 0.0, a / 2.0}, 1.0).elevate_to(4);
  auto acc = xr.derivative(2);
  EXPECT_NEAR(acc.eval(0.5), a, 1e-12);
  EXPECT_GE(acc.eval(0.5), nb.lo);
  const double theta = a / (s.eval(t_low, 2) + q.g);
  EXPECT_LT(theta, -q.ThetaMax);
}

TEST(Quad, AngleReferences) {
  QuadParams q;
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  const auto times = time_grid(0, 10, 1001);
  BezierCurve<double> still({1.0, 1.0, 1.0, 1.0, 1.0}, 10.0);
  auto flat = quad_angle_refs(still, still, s, q, times);
  for (double th : flat.theta) EXPECT_EQ(th, 0.0);
  auto ang = quad_angle_refs(scenario_x(), scenario_x(), s, q, times);
  EXPECT_LE(ang.max_abs_theta(), q.ThetaMax);
  Sigmoid hover{1.0, 1.0 + 1e-9, 1e-3, 5.0};
  auto hv = quad_angle_refs(scenario_x(), scenario_x(), hover, q, times);
  const auto acc = scenario_x().derivative(2);
  for (std::size_t i = 0; i < times.size(); i += 97) EXPECT_NEAR(hv.theta[i], acc.at_time(times[i]) / q.g, 1e-9);
  EXPECT_THROW(quad_angle_refs(scenario_x(), scenario_x(), Sigmoid{0.0, 2.0, 7.0, 5.0}, q, times),
               SingularityError);
}

TEST(Quad, TorqueReferencesMatchFiniteDifferenceOfAngles) {
  QuadParams q;
  Sigmoid s{0.0, 2.0, 2.0, 5.0};
  auto x = scenario_x();
  BezierCurve<double> y({0, 0, 0, 4, 2.5, 2, 2, 2, 2}, 10.0);
  BezierCurve<double> psi({0.0, 0.2, 0.5, 0.5, 0.5}, 10.0);
  QuadReference ref(x, y, s, psi, q);
  const auto ax = x.derivative(2);
  auto theta = [&](double t) { return ax.at_time(t) / (s.eval(t, 2) + q.g); };
  const double h = 1e-3;
  for (double t = 0.5; t < 9.5; t += 0.31) {
    const auto r = ref.at(t);
    EXPECT_NEAR(r.theta, theta(t), 1e-14);
    EXPECT_NEAR(r.theta_d, (theta(t + h) - theta(t - h)) / (2 * h), 1e-5);
    EXPECT_NEAR(r.theta_dd, (theta(t + h) - 2 * theta(t) + theta(t - h)) / (h * h), 1e-3);
    EXPECT_NEAR(r.u4, q.Iz * psi.derivative(2).at_time(t), 1e-15);
  }
  auto tq = quad_torque_refs(x, y, psi, s, q, time_grid(0, 10, 501));
  for (const auto& f : tq.flags) EXPECT_TRUE(f.empty());
}

TEST(Quad, HoverTorqueIsLinearFourthDerivative) {
  QuadParams q;
  auto c = symbolic_curve({"0", "a1", "a2", "a3", "0"}, Rational(1));
  auto u2 = quad_hover_torque_sym(c, q);
  ASSERT_EQ(u2.degree(), 0);
  const Rational k = decimal_rational(q.Ix) / decimal_rational(q.g);
  EXPECT_EQ(u2[0], p("-4*a1 + 6*a2 - 4*a3") * PolyExpr(Rational(24) * k));
  EXPECT_LE(u2[0].degree(), 1u);
  auto u3 = quad_hover_torque_sym(c, q, Axis::Y);
  EXPECT_EQ(u3[0], -u2[0] * PolyExpr(decimal_rational(q.Iy) / decimal_rational(q.Ix)));
  auto same = quad_hover_torque_sym(symbolic_curve({"b", "b", "b", "b", "b", "b"}, Rational(2)), q);
  for (const auto& cp : same.control_points()) EXPECT_TRUE(cp.is_zero());
  EXPECT_THROW(quad_hover_torque_sym(symbolic_curve({"a", "b", "c"}, Rational(1)), q), DomainError);
}

TEST(Quad, HoverTorqueMatchesFullModelInHover) {
  QuadParams q;
  Sigmoid hover{1.0, 1.0 + 1e-12, 1e-3, 5.0};
  auto x = scenario_x();
  BezierCurve<double> psi({0.0, 0.1, 0.1}, 10.0);
  QuadReference ref(x, x, hover, psi, q);
  const auto x4 = x.derivative(4);
  for (double t = 0.0; t <= 10.0; t += 0.5) {
    const auto r = ref.at(t);
    EXPECT_NEAR(r.u2, q.Ix / q.g * x4.at_time(t), 1e-9);
    EXPECT_NEAR(r.u3, -q.Iy / q.g * x4.at_time(t), 1e-9);
  }
}

TEST(Quad, YawTorque) {
  QuadParams q;
  auto u4 = quad_yaw_torque_sym(symbolic_curve({"p0", "p1", "c1", "p3", "p4"}, Rational(10)), q);
  EXPECT_EQ(u4.degree(), 2);
  EXPECT_EQ(u4[0], p("p0 - 2*p1 + c1") * PolyExpr(Rational(12, 100) * decimal_rational(q.Iz)));
}

TEST(Quad, ReferenceRejectsLowDegree) {
  QuadParams q;
  Sigmoid s;
  BezierCurve<double> low({0.0, 1.0, 2.0}, 10.0);
  EXPECT_THROW(QuadReference(low, scenario_x(), s, low, q), DomainError);
  EXPECT_THROW(QuadReference(scenario_x(), scenario_x(), s, BezierCurve<double>({0.0, 1.0}, 10.0), q), DomainError);
}
