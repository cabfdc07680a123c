#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flatbez/bezier.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/poly.hpp"
#include "flatbez/rational.hpp"

namespace flatbez {

enum class Rel { Lt, Le, Gt, Ge, Eq, Ne };

inline std::string to_string(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
  }
  return "?";
}

inline Rel parse_rel(const std::string& s) {
  if (s == "<") return Rel::Lt;
  if (s == "<=") return Rel::Le;
  if (s == ">") return Rel::Gt;
  if (s == ">=") return Rel::Ge;
  if (s == "=" || s == "==") return Rel::Eq;
  if (s == "!=") return Rel::Ne;
  throw ParseError("unknown relation '" + s + "'");
}

inline bool is_strict(Rel r) { return r == Rel::Lt || r == Rel::Gt || r == Rel::Ne; }

/// Sign test `value rel 0`.
template <class T>
bool holds(Rel r, const T& value) {
  switch (r) {
    case Rel::Lt: return value < 0;
    case Rel::Le: return value <= 0;
    case Rel::Gt: return value > 0;
    case Rel::Ge: return value >= 0;
    case Rel::Eq: return value == 0;
    case Rel::Ne: return value != 0;
  }
  return false;
}

/// One normalized relation `expr rel 0`. `group` ties together the two sides
/// of a double inequality on the same control point.
struct Relation {
  std::string name;
  std::string group;
  PolyExpr expr;
  Rel rel = Rel::Ge;

  friend bool operator==(const Relation&, const Relation&) = default;
};

/// Closed or half-infinite parameter range; an absent end means unbounded.
struct ParamRange {
  std::string name;
  std::optional<Rational> lo;
  std::optional<Rational> hi;

  bool finite() const { return lo.has_value() && hi.has_value(); }
  bool contains(const Rational& v) const { return (!lo || *lo <= v) && (!hi || v <= *hi); }
  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

struct CompileStats {
  std::size_t emitted_groups = 0;
  std::size_t retained_groups = 0;
  std::size_t dropped_tautologies = 0;
  friend bool operator==(const CompileStats&, const CompileStats&) = default;
};

/// Conjunction of relations over the parameter box; pinned parameters are
/// already substituted out of every relation.
struct ConstraintSystem {
  std::vector<Relation> relations;
  std::vector<ParamRange> box;
  std::map<std::string, Rational> fixed;
  CompileStats stats;

  std::vector<std::string> parameters() const {
    std::vector<std::string> p;
    p.reserve(box.size());
    for (const auto& b : box) p.push_back(b.name);
    return p;
  }

  std::size_t dimension() const { return box.size(); }

  bool finite_box() const {
    return std::all_of(box.begin(), box.end(), [](const ParamRange& r) { return r.finite(); });
  }

  friend bool operator==(const ConstraintSystem&, const ConstraintSystem&) = default;
};

/// Bound requested on a curve; an absent side is ±∞.
struct CurveBound {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  bool lo_strict = false;
  bool hi_strict = false;
};

/// lo ∗ C_j ∗ hi for every control point C_j. By the convex-hull property
/// these certify the bound on the whole curve.
inline std::vector<Relation> bound_curve(const BezierCurve<PolyExpr>& curve, const CurveBound& b,
                                         const std::string& label) {
  if (b.lo && b.hi && !(*b.lo < *b.hi)) throw DomainError("bound_curve: need lo < hi");
  std::vector<Relation> out;
  const auto& c = curve.control_points();
  for (std::size_t j = 0; j < c.size(); ++j) {
    const std::string group = label + "[" + std::to_string(j) + "]";
    if (b.lo)
      out.push_back({group + " lo", group, c[j] - PolyExpr(*b.lo), b.lo_strict ? Rel::Gt : Rel::Ge});
    if (b.hi)
      out.push_back({group + " hi", group, c[j] - PolyExpr(*b.hi), b.hi_strict ? Rel::Lt : Rel::Le});
  }
  return out;
}

/// Derivative constraints at both ends, y^(i)(t0) and y^(i)(tf) for
/// i = 0..q, solved for the first and last q+1 control points, which must be
/// free parameters.
inline std::map<std::string, Rational> endpoint_conditions(const BezierCurve<PolyExpr>& curve,
                                                           int q,
                                                           const std::vector<Rational>& t0_values,
                                                           const std::vector<Rational>& tf_values) {
  const int n = curve.degree();
  if (q < 0) throw DomainError("endpoint_conditions: negative order");
  if (t0_values.size() != static_cast<std::size_t>(q + 1) ||
      tf_values.size() != static_cast<std::size_t>(q + 1))
    throw DomainError("endpoint_conditions: need q+1 values at each end");
  if (2 * (q + 1) > n + 1)
    throw DomainError("endpoint_conditions: degree " + std::to_string(n) +
                      " too low for order " + std::to_string(q) + " at both ends");

  std::map<std::string, Rational> fixed;
  auto pin = [&](std::size_t ctrl_index, bool at_start, int order, const Rational& target) {
    const std::string name = curve[ctrl_index].as_single_variable();
    if (name.empty())
      throw DomainError("endpoint_conditions: control point " + std::to_string(ctrl_index) +
                        " is not a free parameter");
    if (fixed.count(name))
      throw DomainError("endpoint_conditions: parameter " + name + " pinned twice");
    auto reduced = curve.map([&](const PolyExpr& p) { return p.partial_substitute(fixed); });
    auto d = reduced.derivative(order);
    const PolyExpr& end = at_start ? d.control_points().front() : d.control_points().back();
    PolyExpr eq = end - PolyExpr(target);
    if (eq.degree() > 1 || eq.variables() != std::vector<std::string>{name})
      throw DomainError("endpoint_conditions: condition does not isolate " + name);
    Rational value = -eq.linear_coefficient("") / eq.linear_coefficient(name);
    fixed.emplace(name, value);
  };
  for (int i = 0; i <= q; ++i) {
    pin(static_cast<std::size_t>(i), true, i, t0_values[static_cast<std::size_t>(i)]);
    pin(static_cast<std::size_t>(n - i), false, i, tf_values[static_cast<std::size_t>(i)]);
  }
  return fixed;
}

/// Substitutes pinned parameters, drops constant relations that hold and
/// rejects constant relations that fail.
inline ConstraintSystem compile(const std::vector<Relation>& relations,
                                const std::vector<ParamRange>& box,
                                const std::map<std::string, Rational>& fixed = {}) {
  ConstraintSystem sys;
  sys.fixed = fixed;
  std::set<std::string> declared;
  for (const auto& b : box) {
    if (fixed.count(b.name)) continue;
    if (!declared.insert(b.name).second)
      throw ConfigError("box: parameter '" + b.name + "' declared twice");
    if (b.lo && b.hi && *b.lo > *b.hi)
      throw ConfigError("box: parameter '" + b.name + "' has lo > hi");
    sys.box.push_back(b);
  }

  std::set<std::string> groups_in, groups_out;
  for (const auto& r : relations) {
    groups_in.insert(r.group);
    Relation red = r;
    red.expr = fixed.empty() ? r.expr : r.expr.partial_substitute(fixed);
    if (red.expr.is_constant()) {
      const Rational v = red.expr.constant_value();
      if (!holds(red.rel, v))
        throw InfeasibleError("relation '" + r.name + "' is constant " + v.get_str() + " " +
                              to_string(r.rel) + " 0, which is false");
      ++sys.stats.dropped_tautologies;
      continue;
    }
    for (const auto& v : red.expr.variables())
      if (!declared.count(v))
        throw ConfigError("relation '" + r.name + "': parameter '" + v +
                          "' is neither in the box nor fixed");
    groups_out.insert(r.group);
    sys.relations.push_back(std::move(red));
  }
  sys.stats.emitted_groups = groups_in.size();
  sys.stats.retained_groups = groups_out.size();
  return sys;
}

}  // namespace flatbez
