#include <gtest/gtest.h>

#include "support.hpp"

using namespace flatbez;

namespace {

ConstraintSystem one_d(const char* expr, Rel rel, const char* lo, const char* hi) {
  return compile({{"r", "r", parse_poly(expr), rel}}, {{"a", parse_rational(lo), parse_rational(hi)}});
}

ConstraintSystem from_config(const char* rel) { return build_system(load_config(test::source_path(rel))); }

bool box_contains(const Box& b, const std::vector<double>& p) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (p[i] < b[i].lo || p[i] > b[i].hi) return false;
  return true;
}

const RegionBox* locate(const std::vector<RegionBox>& v, const std::vector<double>& p) {
  for (const auto& b : v)
    if (box_contains(b.box, p)) return &b;
  return nullptr;
}

bool interiors_overlap(const Box& a, const Box& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].hi <= b[i].lo || b[i].hi <= a[i].lo) return false;
  return true;
}

}  // namespace

TEST(Classify, Examples) {
  auto pos = one_d("a", Rel::Ge, "-1", "1");
  EXPECT_EQ(classify_box(pos, {Interval(0.1, 0.2)}).status, BoxStatus::Inside);
  EXPECT_EQ(classify_box(pos, {Interval(-0.2, -0.1)}).status, BoxStatus::Outside);
  auto sq = one_d("a^2 - 1", Rel::Le, "-2", "2");
  EXPECT_EQ(classify_box(sq, {Interval(0.5, 1.5)}).status, BoxStatus::Unknown);
}

TEST(Classify, StrictRelationTouchingZeroCarriesClosure) {
  auto strict = one_d("a", Rel::Gt, "0", "1");
  auto c = classify_box(strict, {Interval(0.0, 0.5)});
  EXPECT_EQ(c.status, BoxStatus::Inside);
  EXPECT_TRUE(c.closure);
  EXPECT_FALSE(classify_box(strict, {Interval(0.1, 0.5)}).closure);
  EXPECT_EQ(classify_box(one_d("a", Rel::Gt, "-1", "0"), {Interval(-1.0, 0.0)}).status, BoxStatus::Outside);
}

TEST(BranchAndPrune, UnitSquareInterval) {
  auto sys = one_d("a^2 - 1", Rel::Le, "-2", "2");
  auto r = branch_and_prune(sys, 1e-3, 1000000);
  ASSERT_FALSE(r.inside.empty());
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& b : r.inside) {
    lo = std::min(lo, b.box[0].lo);
    hi = std::max(hi, b.box[0].hi);
  }
  EXPECT_NEAR(lo, -1.0, 2e-3);
  EXPECT_NEAR(hi, 1.0, 2e-3);
  EXPECT_NEAR(r.stats.inside_volume, 2.0, 4e-3);
  EXPECT_FALSE(r.stats.partial);
  EXPECT_NEAR(r.stats.inside_volume + r.stats.outside_volume + r.stats.boundary_volume, 4.0, 1e-12);
}

TEST(BranchAndPrune, ContradictorySystem) {
  auto sys = from_config("configs/vehicle_contradictory.json");
  auto r = branch_and_prune(sys, 0.05, 1000000);
  EXPECT_TRUE(r.inside.empty());
  EXPECT_NEAR(r.stats.outside_volume, r.stats.total_volume, 1e-12);
}

TEST(BranchAndPrune, BudgetExhaustionIsPartial) {
  auto sys = from_config("configs/vehicle_2d.json");
  auto r = branch_and_prune(sys, 1e-3, 10);
  EXPECT_TRUE(r.stats.partial);
  EXPECT_EQ(r.stats.boxes_processed, 10u);
  EXPECT_NEAR(r.stats.inside_volume + r.stats.outside_volume + r.stats.boundary_volume, r.stats.total_volume, 1e-12);
}

TEST(BranchAndPrune, RejectsBadInput) {
  auto sys = one_d("a", Rel::Ge, "0", "1");
  EXPECT_THROW(branch_and_prune(sys, 0.0, 10), DomainError);
  auto open = compile({}, {{"a", Rational(0), std::nullopt}});
  EXPECT_THROW(branch_and_prune(open, 0.1, 10), ConfigError);
}

TEST(BranchAndPrune, VehicleTwoParameterPoints) {
  auto r = branch_and_prune(from_config("configs/vehicle_2d.json"), 1e-2, 1000000);
  EXPECT_NE(locate(r.inside, {0.05, 0.5}), nullptr);
  EXPECT_NE(locate(r.outside, {0.05, -0.2}), nullptr);
}

TEST(BranchAndPrune, InsideBoxesAreSound) {
  auto sys = from_config("configs/vehicle_2d.json");
  auto r = branch_and_prune(sys, 1e-2, 1000000);
  std::size_t k = 0;
  for (const auto& b : r.inside) {
    BoxSampler s(b.box, 100 + k++);
    for (int i = 0; i < 10; ++i) ASSERT_TRUE(is_member(sys, s.next()));
  }
}

TEST(BranchAndPrune, InsideBoxesAreSoundThreeParameters) {
  auto sys = from_config("configs/vehicle.json");
  auto r = branch_and_prune(sys, 0.05, 1000000);
  ASSERT_FALSE(r.inside.empty());
  std::size_t k = 0;
  for (const auto& b : r.inside) {
    BoxSampler s(b.box, 7 + k++);
    for (int i = 0; i < 10; ++i) ASSERT_TRUE(is_member(sys, s.next()));
  }
}

TEST(BranchAndPrune, OutsideBoxesExcludeFeasibleSign) {
  auto sys = from_config("configs/vehicle_2d.json");
  const CompiledSystem cs(sys);
  auto r = branch_and_prune(sys, 1e-2, 1000000);
  std::size_t k = 0;
  for (const auto& b : r.outside) {
    const Interval e = cs.enclose(b.violated, b.box);
    const Rel rel = cs.rel(b.violated);
    switch (rel) {
      case Rel::Gt: EXPECT_LE(e.hi, 0.0); break;
      case Rel::Ge: EXPECT_LT(e.hi, 0.0); break;
      case Rel::Lt: EXPECT_GE(e.lo, 0.0); break;
      case Rel::Le: EXPECT_GT(e.lo, 0.0); break;
      default: break;
    }
    BoxSampler s(b.box, 900 + k++);
    for (int i = 0; i < 3; ++i) ASSERT_FALSE(is_member(sys, s.next()));
  }
}

TEST(BranchAndPrune, BoxesAreDisjoint) {
  auto r = branch_and_prune(from_config("configs/vehicle_2d.json"), 2e-2, 1000000);
  std::vector<const Box*> all;
  for (auto* v : {&r.inside, &r.outside, &r.boundary})
    for (const auto& b : *v) all.push_back(&b.box);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) ASSERT_FALSE(interiors_overlap(*all[i], *all[j])) << i << " " << j;
}

TEST(BranchAndPrune, MonotoneRefinement) {
  auto sys = from_config("configs/vehicle.json");
  double prev = -1.0;
  for (double w : {0.4, 0.2, 0.1, 0.05}) {
    auto r = branch_and_prune(sys, w, 1000000);
    EXPECT_GE(r.stats.inside_volume, prev);
    prev = r.stats.inside_volume;
  }
  auto sys2 = from_config("configs/vehicle_2d.json");
  prev = -1.0;
  for (double w : {0.08, 0.04, 0.02, 0.01}) {
    auto r = branch_and_prune(sys2, w, 1000000);
    EXPECT_GE(r.stats.inside_volume, prev);
    prev = r.stats.inside_volume;
  }
}

TEST(BranchAndPrune, Deterministic) {
  auto sys = from_config("configs/vehicle_2d.json");
  auto a = branch_and_prune(sys, 2e-2, 1000000), b = branch_and_prune(sys, 2e-2, 1000000);
  EXPECT_EQ(a.inside, b.inside);
  EXPECT_EQ(a.outside, b.outside);
  EXPECT_EQ(a.boundary, b.boundary);
}

TEST(BranchAndPrune, OracleConsistency) {
  auto sys = from_config("configs/vehicle_2d.json");
  auto r = branch_and_prune(sys, 1e-2, 1000000);
  auto mc = sample_oracle(sys, 100000, 1);
  const double inner = r.inside_fraction();
  const double outer = inner + r.stats.boundary_volume / r.stats.total_volume;
  // The certified fraction is a lower bound and inside+boundary an upper bound.
  EXPECT_LE(inner, mc.fraction() + 3 * mc.std_error());
  EXPECT_GE(outer, mc.fraction() - 3 * mc.std_error());
  RecordProperty("inside_fraction", std::to_string(inner));
  RecordProperty("mc_fraction", std::to_string(mc.fraction()));
  EXPECT_NEAR(inner, mc.fraction(), 3 * mc.std_error() + r.stats.boundary_volume / r.stats.total_volume);
}

TEST(Oracle, TrivialCases) {
  auto whole = compile({}, {{"a", Rational(0), Rational(1)}, {"b", Rational(0), Rational(1)}});
  EXPECT_EQ(sample_oracle(whole, 1000, 3).fraction(), 1.0);
  auto none = from_config("configs/vehicle_contradictory.json");
  EXPECT_EQ(sample_oracle(none, 1000, 3).fraction(), 0.0);
}

TEST(Oracle, SeededAndReproducible) {
  auto sys = from_config("configs/vehicle_2d.json");
  auto a = sample_oracle(sys, 5000, 9), b = sample_oracle(sys, 5000, 9), c = sample_oracle(sys, 5000, 10);
  EXPECT_EQ(a.feasible, b.feasible);
  EXPECT_EQ(a.feasible_witnesses, b.feasible_witnesses);
  EXPECT_NE(a.feasible_witnesses, c.feasible_witnesses);
  for (const auto& w : a.feasible_witnesses) EXPECT_TRUE(is_member(sys, w));
  for (const auto& w : a.infeasible_witnesses) EXPECT_FALSE(is_member(sys, w));
}

TEST(Oracle, PssOriginFeasible) {
  auto sys = from_config("configs/pss_example.json");
  auto m = membership(sys, {0, 0});
  EXPECT_TRUE(m.feasible);
  std::vector<Rational> values;
  for (const auto& r : m.relations) values.push_back(r.value);
  EXPECT_EQ(values, (std::vector<Rational>{1, 2, 10, 1}));
}

TEST(Fixture, VehicleAgreement) {
  auto fx = RegionFixture::load(test::source_path("fixtures/vehicle_2d_cad.json"));
  auto res = cad_fixture_check(fx, from_config("configs/vehicle_2d.json"), 10000, 5);
  EXPECT_GE(res.ratio(), 0.999) << res.disagreements.size();
  EXPECT_LT(res.excluded, 100u);
}

TEST(Fixture, PssAgreement) {
  auto fx = RegionFixture::load(test::source_path("fixtures/pss_cad.json"));
  auto res = cad_fixture_check(fx, from_config("configs/pss_example.json"), 10000, 6);
  EXPECT_GE(res.ratio(), 0.999) << res.disagreements.size();
}

TEST(Fixture, WholeBoxAgreesWithEmptySystem) {
  auto sys = compile({}, {{"a", Rational(0), Rational(1)}, {"b", Rational(-1), Rational(1)}});
  auto res = cad_fixture_check(RegionFixture::whole({"a", "b"}), sys, 1000, 1);
  EXPECT_EQ(res.ratio(), 1.0);
}

TEST(Fixture, AtomParsing) {
  const std::vector<std::string> params{"x", "y"};
  auto a = Atom::parse("0 < x <= sqrt(y) + 1", params);
  EXPECT_TRUE(a.holds_at({0.5, 0.0}));
  EXPECT_FALSE(a.holds_at({0.0, 0.0}));
  EXPECT_FALSE(a.holds_at({1.0, -1.0}));
  EXPECT_NEAR(a.margin({0.5, 4.0}), 0.5, 1e-15);
  EXPECT_THROW(Atom::parse("x + y", params), ParseError);
  EXPECT_THROW(Atom::parse("z < 1", params), ParseError);
  EXPECT_THROW(RegionFixture::from_json(nlohmann::json{{"schema", "nope"}}), ConfigError);
}

TEST(Fixture, ParameterMismatchRejected) {
  auto fx = RegionFixture::whole({"p", "q"});
  EXPECT_THROW(cad_fixture_check(fx, from_config("configs/vehicle_2d.json"), 10, 1), ConfigError);
}
