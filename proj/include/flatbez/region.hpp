#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "flatbez/constraints.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/interval.hpp"
#include "flatbez/poly.hpp"

namespace flatbez {

using Box = std::vector<Interval>;

inline double volume(const Box& b) {
  double v = 1.0;
  for (const auto& x : b) v *= x.width();
  return v;
}

/// Relations pre-lowered to interval coefficients indexed by parameter slot,
/// so box classification touches no rationals.
class CompiledSystem {
 public:
  explicit CompiledSystem(const ConstraintSystem& sys) : sys_(&sys) {
    const auto params = sys.parameters();
    for (const auto& r : sys.relations) {
      CompiledRelation cr;
      cr.rel = r.rel;
      std::vector<std::size_t> slot;
      for (const auto& v : r.expr.variables())
        slot.push_back(static_cast<std::size_t>(
            std::find(params.begin(), params.end(), v) - params.begin()));
      for (const auto& [e, c] : r.expr.terms()) {
        Term t;
        t.coef = Interval::enclose(c);
        for (std::size_t i = 0; i < e.size(); ++i)
          if (e[i]) t.powers.emplace_back(slot[i], e[i]);
        cr.terms.push_back(std::move(t));
      }
      rels_.push_back(std::move(cr));
    }
  }

  const ConstraintSystem& system() const { return *sys_; }
  std::size_t size() const { return rels_.size(); }
  Rel rel(std::size_t k) const { return rels_[k].rel; }

  Interval enclose(std::size_t k, const Box& box) const {
    Interval sum(0.0);
    for (const auto& t : rels_[k].terms) {
      Interval term = t.coef;
      for (const auto& [slot, p] : t.powers) term = term * flatbez::pow(box[slot], p);
      sum = sum + term;
    }
    return sum;
  }

  double value(std::size_t k, const std::vector<double>& point) const {
    double sum = 0.0;
    for (const auto& t : rels_[k].terms) {
      double term = t.coef.mid();
      for (const auto& [slot, p] : t.powers) term *= std::pow(point[slot], static_cast<double>(p));
      sum += term;
    }
    return sum;
  }

 private:
  struct Term {
    Interval coef;
    std::vector<std::pair<std::size_t, unsigned>> powers;
  };
  struct CompiledRelation {
    Rel rel;
    std::vector<Term> terms;
  };
  const ConstraintSystem* sys_;
  std::vector<CompiledRelation> rels_;
};

enum class BoxStatus { Inside, Outside, Unknown };

inline std::string to_string(BoxStatus s) {
  switch (s) {
    case BoxStatus::Inside: return "inside";
    case BoxStatus::Outside: return "outside";
    case BoxStatus::Unknown: return "boundary";
  }
  return "?";
}

struct Classification {
  BoxStatus status = BoxStatus::Unknown;
  /// Inside, but some strict relation was certified only in its closed form.
  bool closure = false;
  /// For Outside: index of a relation violated everywhere on the box.
  std::size_t violated = 0;
};

namespace detail {

/// Per-relation verdict over an enclosure: +1 certainly holds (closed form),
/// -1 certainly fails everywhere, 0 undecided.
inline int certify(Rel rel, const Interval& e, bool& touches) {
  touches = false;
  switch (rel) {
    case Rel::Ge:
    case Rel::Gt:
      if (e.lo >= 0.0) {
        touches = rel == Rel::Gt && e.lo == 0.0;
        return 1;
      }
      if (rel == Rel::Ge ? e.hi < 0.0 : e.hi <= 0.0) return -1;
      return 0;
    case Rel::Le:
    case Rel::Lt:
      if (e.hi <= 0.0) {
        touches = rel == Rel::Lt && e.hi == 0.0;
        return 1;
      }
      if (rel == Rel::Le ? e.lo > 0.0 : e.lo >= 0.0) return -1;
      return 0;
    case Rel::Eq:
      if (e.lo == 0.0 && e.hi == 0.0) return 1;
      if (e.lo > 0.0 || e.hi < 0.0) return -1;
      return 0;
    case Rel::Ne:
      if (e.lo > 0.0 || e.hi < 0.0) return 1;
      if (e.lo == 0.0 && e.hi == 0.0) return -1;
      return 0;
  }
  return 0;
}

}  // namespace detail

/// Sound three-way classification of a box against every relation.
inline Classification classify_box(const CompiledSystem& cs, const Box& box) {
  Classification c;
  bool all_hold = true;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    bool touches = false;
    const int v = detail::certify(cs.rel(k), cs.enclose(k, box), touches);
    if (v < 0) {
      c.status = BoxStatus::Outside;
      c.violated = k;
      return c;
    }
    if (v == 0) all_hold = false;
    c.closure = c.closure || touches;
  }
  c.status = all_hold ? BoxStatus::Inside : BoxStatus::Unknown;
  if (!all_hold) c.closure = false;
  return c;
}

inline Classification classify_box(const ConstraintSystem& sys, const Box& box) {
  return classify_box(CompiledSystem(sys), box);
}

struct RegionBox {
  Box box;
  bool closure = false;
  std::size_t violated = 0;  ///< meaningful for outside boxes
  friend bool operator==(const RegionBox&, const RegionBox&) = default;
};

struct RegionStats {
  std::size_t boxes_processed = 0;
  std::size_t max_depth = 0;
  double total_volume = 0.0;
  double inside_volume = 0.0;
  double outside_volume = 0.0;
  double boundary_volume = 0.0;
  bool partial = false;
};

/// Inner approximation (inside), certified exterior (outside) and undecided
/// remainder (boundary) of the feasible set; together they partition the box.
struct RegionApprox {
  std::vector<std::string> parameters;
  std::vector<RegionBox> inside;
  std::vector<RegionBox> outside;
  std::vector<RegionBox> boundary;
  RegionStats stats;

  double inside_fraction() const {
    return stats.total_volume > 0 ? stats.inside_volume / stats.total_volume : 0.0;
  }
};

inline Box initial_box(const ConstraintSystem& sys) {
  Box b;
  for (const auto& r : sys.box) {
    if (!r.finite())
      throw ConfigError("region: parameter '" + r.name + "' needs a finite range");
    b.emplace_back(round_down(*r.lo), round_up(*r.hi));
  }
  return b;
}

/// Depth-first interval branch-and-prune. Unknown boxes are bisected along
/// the widest dimension relative to the initial box extent (lowest index on
/// ties) while their largest absolute width exceeds min_width. The
/// bisection rule does not depend on min_width, so a finer run refines a
/// coarser one and the certified inside volume can only grow.
inline RegionApprox branch_and_prune(const ConstraintSystem& sys, double min_width,
                                     std::size_t budget) {
  if (!(min_width > 0.0)) throw DomainError("branch_and_prune: min_width must be positive");
  const Box root = initial_box(sys);
  const CompiledSystem cs(sys);
  RegionApprox out;
  out.parameters = sys.parameters();
  out.stats.total_volume = volume(root);

  std::vector<double> extent;
  for (const auto& x : root) extent.push_back(x.width() > 0 ? x.width() : 1.0);

  struct Work {
    Box box;
    std::size_t depth;
  };
  std::vector<Work> stack{{root, 0}};
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    if (out.stats.boxes_processed >= budget) {
      out.stats.partial = true;
      out.boundary.push_back({std::move(w.box), false, 0});
      continue;
    }
    ++out.stats.boxes_processed;
    out.stats.max_depth = std::max(out.stats.max_depth, w.depth);
    const Classification c = classify_box(cs, w.box);
    if (c.status == BoxStatus::Inside) {
      out.inside.push_back({std::move(w.box), c.closure, 0});
      continue;
    }
    if (c.status == BoxStatus::Outside) {
      out.outside.push_back({std::move(w.box), false, c.violated});
      continue;
    }
    double widest_abs = 0.0, widest_scaled = -1.0;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < w.box.size(); ++i) {
      widest_abs = std::max(widest_abs, w.box[i].width());
      const double s = w.box[i].width() / extent[i];
      if (s > widest_scaled) {
        widest_scaled = s;
        dim = i;
      }
    }
    if (w.box.empty() || widest_abs <= min_width) {
      out.boundary.push_back({std::move(w.box), false, 0});
      continue;
    }
    const double m = w.box[dim].mid();
    Box left = w.box, right = w.box;
    left[dim].hi = m;
    right[dim].lo = m;
    // Right pushed first so the left half is explored first.
    stack.push_back({std::move(right), w.depth + 1});
    stack.push_back({std::move(left), w.depth + 1});
  }

  auto sum = [](const std::vector<RegionBox>& v) {
    double s = 0.0;
    for (const auto& b : v) s += volume(b.box);
    return s;
  };
  auto order = [](const RegionBox& a, const RegionBox& b) {
    for (std::size_t i = 0; i < a.box.size(); ++i) {
      if (a.box[i].lo != b.box[i].lo) return a.box[i].lo < b.box[i].lo;
      if (a.box[i].hi != b.box[i].hi) return a.box[i].hi < b.box[i].hi;
    }
    return false;
  };
  for (auto* v : {&out.inside, &out.outside, &out.boundary}) std::sort(v->begin(), v->end(), order);
  out.stats.inside_volume = sum(out.inside);
  out.stats.outside_volume = sum(out.outside);
  out.stats.boundary_volume = sum(out.boundary);
  return out;
}

// ---------------------------------------------------------------------------

struct RelationReport {
  std::string name;
  Rel rel;
  Rational value;
  double slack;  ///< signed margin, positive when satisfied (0 for = / !=)
  bool satisfied;
};

struct MembershipReport {
  bool feasible = false;
  bool in_box = true;
  std::vector<std::string> box_violations;
  std::vector<RelationReport> relations;

  std::vector<std::string> violated() const {
    std::vector<std::string> v;
    for (const auto& r : relations)
      if (!r.satisfied) v.push_back(r.name);
    return v;
  }
};

inline std::map<std::string, Rational> bind_point(const ConstraintSystem& sys,
                                                  const std::vector<Rational>& point) {
  if (point.size() != sys.dimension())
    throw DomainError("membership: point has " + std::to_string(point.size()) +
                      " coordinates, system has " + std::to_string(sys.dimension()) +
                      " parameters");
  std::map<std::string, Rational> b;
  for (std::size_t i = 0; i < point.size(); ++i) b.emplace(sys.box[i].name, point[i]);
  return b;
}

/// Exact rational evaluation of every relation at the point.
inline MembershipReport membership(const ConstraintSystem& sys, const std::vector<Rational>& point) {
  const auto bindings = bind_point(sys, point);
  MembershipReport rep;
  for (std::size_t i = 0; i < sys.box.size(); ++i)
    if (!sys.box[i].contains(point[i])) {
      rep.in_box = false;
      rep.box_violations.push_back(sys.box[i].name);
    }
  bool ok = rep.in_box;
  for (const auto& r : sys.relations) {
    RelationReport rr{r.name, r.rel, r.expr.substitute(bindings), 0.0, false};
    rr.satisfied = holds(r.rel, rr.value);
    const double v = rr.value.get_d();
    switch (r.rel) {
      case Rel::Gt:
      case Rel::Ge: rr.slack = v; break;
      case Rel::Lt:
      case Rel::Le: rr.slack = -v; break;
      default: rr.slack = 0.0;
    }
    ok = ok && rr.satisfied;
    rep.relations.push_back(std::move(rr));
  }
  rep.feasible = ok;
  return rep;
}

inline bool is_member(const ConstraintSystem& sys, const std::vector<double>& point) {
  std::vector<Rational> q;
  q.reserve(point.size());
  for (double x : point) q.push_back(exact_rational(x));
  const auto bindings = bind_point(sys, q);
  for (std::size_t i = 0; i < sys.box.size(); ++i)
    if (!sys.box[i].contains(q[i])) return false;
  for (const auto& r : sys.relations)
    if (!holds(r.rel, r.expr.substitute(bindings))) return false;
  return true;
}

/// Seeded uniform sampler over the finite parameter box.
class BoxSampler {
 public:
  BoxSampler(const ConstraintSystem& sys, std::uint64_t seed) : rng_(seed) {
    for (const auto& r : sys.box) {
      if (!r.finite()) throw ConfigError("sampling: parameter '" + r.name + "' needs a finite range");
      dists_.emplace_back(r.lo->get_d(), r.hi->get_d());
    }
  }
  explicit BoxSampler(const Box& box, std::uint64_t seed) : rng_(seed) {
    for (const auto& x : box) dists_.emplace_back(x.lo, x.hi);
  }

  std::vector<double> next() {
    std::vector<double> p;
    p.reserve(dists_.size());
    for (auto& d : dists_) p.push_back(d(rng_));
    return p;
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::uniform_real_distribution<double>> dists_;
};

struct SampleResult {
  std::size_t samples = 0;
  std::size_t feasible = 0;
  std::vector<std::vector<double>> feasible_witnesses;
  std::vector<std::vector<double>> infeasible_witnesses;

  double fraction() const { return samples ? static_cast<double>(feasible) / samples : 0.0; }
  /// Binomial standard error of fraction().
  double std_error() const {
    const double p = fraction();
    return samples ? std::sqrt(p * (1.0 - p) / samples) : 0.0;
  }
};

/// Brute-force feasibility estimate by exact membership at seeded uniform points.
inline SampleResult sample_oracle(const ConstraintSystem& sys, std::size_t n, std::uint64_t seed,
                                  std::size_t keep_witnesses = 8) {
  BoxSampler sampler(sys, seed);
  SampleResult res;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = sampler.next();
    ++res.samples;
    if (is_member(sys, p)) {
      ++res.feasible;
      if (res.feasible_witnesses.size() < keep_witnesses) res.feasible_witnesses.push_back(p);
    } else if (res.infeasible_witnesses.size() < keep_witnesses) {
      res.infeasible_witnesses.push_back(std::move(p));
    }
  }
  return res;
}

}  // namespace flatbez
