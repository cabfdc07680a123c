#include <gtest/gtest.h>

#include "support.hpp"

using namespace flatbez;

namespace {

bool inside_envelope(const Envelope& e, double tau, double f, double tol = 1e-12) {
  return e.lower(tau) - tol <= f && f <= e.upper(tau) + tol;
}

BezierCurve<double> scenario_x() { return BezierCurve<double>({0, 0, 0, 8, 12.5, 9, 2, 2, 2}, 10.0); }
BezierCurve<double> scenario_y() { return BezierCurve<double>({0, 0, 0, 4, 2.5, 2, 2, 2, 2}, 10.0); }

/// Sampling oracle over the envelope sweep itself.
bool sampled_clear(const Envelope& ex, const Envelope& ey, const Rect& r, double t1, double t2, int n) {
  for (int i = 0; i <= n; ++i) {
    const double t = t1 + (t2 - t1) * i / n;
    if (ex.upper(t) >= r.xmin && ex.lower(t) <= r.xmax && ey.upper(t) >= r.ymin && ey.lower(t) <= r.ymax)
      return false;
  }
  return true;
}

}  // namespace

TEST(Envelope, MuInf) {
  EXPECT_DOUBLE_EQ(mu_inf(4), 0.5);
  EXPECT_DOUBLE_EQ(mu_inf(2), 0.25);
  EXPECT_DOUBLE_EQ(mu_inf(3), 2.0 / 6.0);
}

TEST(Envelope, DmaxExamples) {
  EXPECT_EQ(dmax(BezierCurve<double>({0.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(dmax(BezierCurve<double>({0.0, 1.0, 0.0})), 0.5);
}

TEST(Envelope, SharpnessForQuadratic) {
  BezierCurve<double> c({0.0, 1.0, 0.0});
  const auto poly = control_polygon(c);
  double worst = 0.0;
  for (double t : test::grid(1001)) worst = std::max(worst, std::fabs(c.eval(t) - poly(t)));
  EXPECT_GE(worst, 0.5 - 1e-9);
}

TEST(Envelope, QuadraticHandConstruction) {
  auto e = build_envelope(BezierCurve<double>({0.0, 1.0, 0.0}));
  EXPECT_EQ(e.upper.values(), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(e.lower.values(), (std::vector<double>{0, 0.5, 0}));
  EXPECT_TRUE(inside_envelope(e, 0.5, 0.5));
}

TEST(Envelope, ConstantCurve) {
  auto e = build_envelope(BezierCurve<double>({3.0, 3.0, 3.0, 3.0}));
  EXPECT_EQ(e.lower.values(), e.upper.values());
  EXPECT_EQ(e.dmax, 0.0);
}

TEST(Envelope, PolygonInterpolatesVertices) {
  ControlPolygon p({1.0, 4.0, -2.0, 0.5});
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(p(p.abscissa(j)), p.values()[j]);
  EXPECT_EQ(p.abscissa(0), 0.0);
  EXPECT_EQ(p.abscissa(3), 1.0);
  EXPECT_THROW(p(1.5), DomainError);
}

TEST(Envelope, ContainmentRandomCurves) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    BezierCurve<double> c(test::random_points(rng, 1 + i % 12));
    auto e = build_envelope(c);
    EXPECT_EQ(e.lower(0.0), c[0]);
    EXPECT_EQ(e.upper(0.0), c[0]);
    EXPECT_EQ(e.lower(1.0), c.control_points().back());
    EXPECT_EQ(e.upper(1.0), c.control_points().back());
    auto [lo, hi] = minmax_bounds(c);
    for (std::size_t j = 0; j < e.lower.values().size(); ++j) {
      EXPECT_GE(e.lower.values()[j], lo);
      EXPECT_LE(e.upper.values()[j], hi);
    }
    for (double t : test::grid(1001)) ASSERT_TRUE(inside_envelope(e, t, c.eval(t))) << i << " " << t;
  }
}

TEST(Envelope, ContainmentScenarioCurve) {
  auto x = scenario_x();
  auto e = build_envelope(x);
  for (double t : test::grid(1001)) EXPECT_TRUE(inside_envelope(e, t, x.eval(t)));
}

TEST(Envelope, RefineReducesGap) {
  BezierCurve<double> c({0.0, 1.0, 0.0});
  auto e = refine_envelope(c, 0.2);
  EXPECT_LE(e.dmax, 0.2);
  EXPECT_GT(e.degree(), 2);
  for (double t : test::grid(1001)) EXPECT_TRUE(inside_envelope(e, t, c.eval(t)));
  EXPECT_EQ(refine_envelope(BezierCurve<double>({0.0, 1.0}), 1e-9).dmax, 0.0);
  EXPECT_THROW(refine_envelope(c, 0.0), DomainError);
}

TEST(Envelope, RefineReportsUnmetGap) {
  BezierCurve<double> c({0.0, 1.0, 0.0});
  try {
    refine_envelope(c, 1e-6, 10);
    FAIL() << "expected EnvelopeGapError";
  } catch (const EnvelopeGapError& e) {
    EXPECT_GT(e.achieved(), 1e-6);
  }
}

TEST(Envelope, DmaxNonIncreasingUnderElevation) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    BezierCurve<double> c(test::random_points(rng, 2 + i % 10));
    double prev = dmax(c);
    for (int k = 0; k < 8; ++k) {
      c = c.degree_elevate(1);
      const double d = dmax(c);
      EXPECT_LE(d, prev * (1 + 1e-12) + 1e-14);
      prev = d;
    }
  }
}

TEST(Envelope, ObstacleTrivialCases) {
  auto ex = build_envelope(scenario_x()), ey = build_envelope(scenario_y());
  EXPECT_TRUE(obstacle_clear(ex, ey, Rect{20, 21, 20, 21}, 0.0, 1.0));
  EXPECT_FALSE(obstacle_clear(ex, ey, Rect{1.5, 2.5, 1.5, 2.5}, 0.9, 1.0));
  EXPECT_FALSE(obstacle_clear(ex, ey, Rect{-0.5, 0.5, -0.5, 0.5}, 0.0, 0.1));
  EXPECT_THROW(obstacle_clear(ex, ey, Rect{0, 1, 0, 1}, 0.6, 0.5), DomainError);
}

TEST(Envelope, ObstacleDecisionMatchesSampling) {
  auto ex = build_envelope(scenario_x().elevate_to(16)), ey = build_envelope(scenario_y().elevate_to(16));
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> px(-1, 12), py(-1, 4), sz(0.2, 2.0), tw(0, 1);
  int clear = 0;
  for (int i = 0; i < 20; ++i) {
    const double x0 = px(rng), y0 = py(rng);
    Rect r{x0, x0 + sz(rng), y0, y0 + sz(rng)};
    double t1 = tw(rng), t2 = tw(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (i % 2 == 0) t1 = 0.0, t2 = 1.0;
    const bool exact = obstacle_clear(ex, ey, r, t1, t2);
    EXPECT_EQ(exact, sampled_clear(ex, ey, r, t1, t2, 10000)) << i;
    clear += exact;
  }
  EXPECT_GT(clear, 0);
  EXPECT_LT(clear, 20);
}

TEST(Envelope, ObstacleClearIsSoundAgainstCurve) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> px(-1, 12), py(-1, 4), sz(0.1, 1.5);
  const auto x = scenario_x(), y = scenario_y();
  auto ex = build_envelope(x), ey = build_envelope(y);
  for (int i = 0; i < 200; ++i) {
    const double x0 = px(rng), y0 = py(rng);
    Rect r{x0, x0 + sz(rng), y0, y0 + sz(rng)};
    if (!obstacle_clear(ex, ey, r, 0.0, 1.0)) continue;
    for (double t : test::grid(10001)) {
      const double cx = x.eval(t), cy = y.eval(t);
      ASSERT_FALSE(cx >= r.xmin && cx <= r.xmax && cy >= r.ymin && cy <= r.ymax) << i;
    }
  }
}

TEST(Envelope, CsvExport) {
  std::ostringstream os;
  write_envelope_csv(os, build_envelope(BezierCurve<double>({0.0, 1.0, 0.0})));
  EXPECT_EQ(os.str(), "tau,lower,upper\n0,0,0\n0.5,0.5,1\n1,0,0\n");
}
