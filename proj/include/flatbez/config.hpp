#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flatbez/constraints.hpp"
#include "flatbez/envelope.hpp"
#include "flatbez/flat_models.hpp"
#include "flatbez/io.hpp"
#include "flatbez/poly.hpp"
#include "flatbez/simulate.hpp"

namespace flatbez {

inline constexpr const char* kConfigSchema = "flatbez.config/1";

enum class ModelKind { Vehicle, Quadrotor, Polynomial };

struct CurveSpec {
  std::string name;
  std::vector<std::string> control_points;
  Rational horizon{1};
};

/// One requirement that becomes relations. Kinds:
///   vehicle_input  bound on u_r of the vehicle model
///   derivative     bound on the q-th derivative of a curve, times `scale`
///   tilt           θ/φ tilt window on the second derivative (quadrotor)
///   hover_torque   |u2| or |u3| in hover mode (quadrotor)
///   yaw_torque     |u4| (quadrotor)
///   relation       literal polynomial `expr rel 0`
struct ConstraintSpec {
  std::string kind;
  std::string name;
  std::string curve;
  int order = 0;
  std::optional<int> elevate_to;
  CurveBound bound;
  Rational scale{1};
  Axis axis = Axis::X;
  bool certified = false;
  std::string expr;
  Rel rel = Rel::Ge;
};

struct EndpointSpec {
  std::string curve;
  int order = 0;
  std::vector<Rational> t0;
  std::vector<Rational> tf;
};

struct RegionSettings {
  double min_width = 1e-2;
  std::size_t budget = 1000000;
  std::uint64_t seed = 1;
  std::size_t samples = 0;  ///< Monte-Carlo estimate alongside the region; 0 disables
};

struct SimulationSettings {
  std::vector<LoopMode> modes{LoopMode::OpenLoop};
  double h = 1e-3;
  double lambda = 9.0;
  double v0_offset = 0.0;
  std::vector<double> translational_gains = repeated_pole_gains(4, 3.0);
  std::vector<double> yaw_gains = repeated_pole_gains(2, 3.0);
  State ic_offset;
  std::optional<std::vector<Limit>> limits;
  std::map<std::string, Rational> point;
};

struct Obstacle {
  std::string name;
  Rect rect{};
  double tau1 = 0.0;
  double tau2 = 1.0;
};

struct EnvelopeSettings {
  std::vector<std::string> curves;
  std::optional<int> elevate_to;
  std::vector<Obstacle> obstacles;
  std::string x_curve = "x";
  std::string y_curve = "y";
};

struct ProjectConfig {
  std::string name = "project";
  ModelKind model = ModelKind::Polynomial;
  VehicleParams vehicle;
  QuadParams quad;
  Sigmoid sigmoid;
  std::vector<CurveSpec> curves;
  std::vector<ConstraintSpec> constraints;
  std::vector<EndpointSpec> endpoints;
  std::vector<ParamRange> box;
  std::map<std::string, Rational> fixed;
  RegionSettings region;
  SimulationSettings simulation;
  std::optional<EnvelopeSettings> envelope;

  const CurveSpec& curve(const std::string& name) const {
    for (const auto& c : curves)
      if (c.name == name) return c;
    throw ConfigError("curves: no curve named '" + name + "'");
  }
  bool has_curve(const std::string& name) const {
    for (const auto& c : curves)
      if (c.name == name) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline Rational rational_field(const Json& j, const std::string& path) {
  auto q = bound_from_json(j, path);
  if (!q) throw ConfigError(path + ": must be finite");
  return *q;
}

inline double number_field(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return to_double(parse_rational(j.get<std::string>()));
    } catch (const ParseError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  throw ConfigError(path + ": expected a number");
}

template <class T>
T get_as(const Json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

inline std::vector<Rational> rational_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(rational_field(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number_field(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void parse_bound(const Json& j, const std::string& path, CurveBound& b) {
  if (j.contains("lo")) b.lo = bound_from_json(j.at("lo"), path + ".lo");
  if (j.contains("hi")) b.hi = bound_from_json(j.at("hi"), path + ".hi");
  b.lo_strict = j.value("lo_strict", false);
  b.hi_strict = j.value("hi_strict", false);
  if (j.contains("strict")) b.lo_strict = b.hi_strict = get_as<bool>(j.at("strict"), path + ".strict");
}

inline Axis parse_axis(const Json& j, const std::string& path) {
  const auto s = get_as<std::string>(j, path);
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  throw ConfigError(path + ": axis must be 'x' or 'y'");
}

inline Limit parse_limit(const Json& j, const std::string& path) {
  Limit l;
  l.name = get_as<std::string>(field(j, "name", path), path + ".name");
  const auto ch = j.value("channel", std::string("input"));
  if (ch == "input")
    l.channel = Limit::Channel::Input;
  else if (ch == "state")
    l.channel = Limit::Channel::State;
  else
    throw ConfigError(path + ".channel: must be 'input' or 'state'");
  l.index = j.value("index", std::size_t{0});
  if (j.contains("lo")) l.lo = number_field(j.at("lo"), path + ".lo");
  if (j.contains("hi")) l.hi = number_field(j.at("hi"), path + ".hi");
  l.lo_strict = j.value("lo_strict", false);
  l.hi_strict = j.value("hi_strict", false);
  return l;
}

}  // namespace detail

inline ProjectConfig config_from_json(const Json& j) {
  using namespace detail;
  require_schema(j, kConfigSchema, "config");
  ProjectConfig c;
  c.name = j.value("name", std::string("project"));

  const auto& model = field(j, "model", "config");
  const auto type = get_as<std::string>(field(model, "type", "model"), "model.type");
  if (type == "vehicle") {
    c.model = ModelKind::Vehicle;
    if (model.contains("M")) c.vehicle.M = rational_field(model.at("M"), "model.M");
    if (model.contains("r")) c.vehicle.r = rational_field(model.at("r"), "model.r");
    if (model.contains("Ca")) c.vehicle.Ca = rational_field(model.at("Ca"), "model.Ca");
    if (model.contains("T")) c.vehicle.T = rational_field(model.at("T"), "model.T");
    c.vehicle.validate();
  } else if (type == "quadrotor") {
    c.model = ModelKind::Quadrotor;
    auto num = [&](const char* key, double& dst) {
      if (model.contains(key)) dst = number_field(model.at(key), std::string("model.") + key);
    };
    num("m", c.quad.m);
    num("g", c.quad.g);
    num("Ix", c.quad.Ix);
    num("Iy", c.quad.Iy);
    num("Iz", c.quad.Iz);
    c.quad.U1max = 4.0 * c.quad.m * c.quad.g;
    num("U1max", c.quad.U1max);
    num("theta_max", c.quad.ThetaMax);
    num("phi_max", c.quad.PhiMax);
    num("U2max", c.quad.U2max);
    num("U3max", c.quad.U3max);
    num("U4max", c.quad.U4max);
    c.quad.validate();
    if (model.contains("sigmoid")) {
      const auto& s = model.at("sigmoid");
      auto sn = [&](const char* key, double& dst) {
        if (s.contains(key)) dst = number_field(s.at(key), std::string("model.sigmoid.") + key);
      };
      sn("Hi", c.sigmoid.Hi);
      sn("Hf", c.sigmoid.Hf);
      sn("gamma", c.sigmoid.gamma);
      sn("tm", c.sigmoid.tm);
      try {
        c.sigmoid.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("model.sigmoid: ") + e.what());
      }
    }
  } else if (type == "polynomial") {
    c.model = ModelKind::Polynomial;
  } else {
    throw ConfigError("model.type: expected 'vehicle', 'quadrotor' or 'polynomial'");
  }

  if (j.contains("curves")) {
    for (const auto& [name, cj] : j.at("curves").items()) {
      const std::string path = "curves." + name;
      CurveSpec cs;
      cs.name = name;
      const auto& pts = field(cj, "control_points", path);
      if (!pts.is_array() || pts.empty()) throw ConfigError(path + ".control_points: non-empty array");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = path + ".control_points[" + std::to_string(i) + "]";
        if (pts[i].is_number())
          cs.control_points.push_back(format_double(pts[i].get<double>()));
        else
          cs.control_points.push_back(get_as<std::string>(pts[i], p));
        try {
          (void)parse_poly(cs.control_points.back());
        } catch (const ParseError& e) {
          throw ConfigError(p + ": " + e.what());
        }
      }
      if (cj.contains("degree") &&
          get_as<int>(cj.at("degree"), path + ".degree") + 1 != static_cast<int>(pts.size()))
        throw ConfigError(path + ".degree: does not match the number of control points");
      if (cj.contains("horizon"))
        cs.horizon = rational_field(cj.at("horizon"), path + ".horizon");
      else if (c.model == ModelKind::Vehicle)
        cs.horizon = c.vehicle.T;
      if (cs.horizon <= 0) throw ConfigError(path + ".horizon: must be positive");
      c.curves.push_back(std::move(cs));
    }
  }

  if (j.contains("constraints")) {
    const auto& arr = j.at("constraints");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "constraints[" + std::to_string(i) + "]";
      const auto& cj = arr[i];
      ConstraintSpec s;
      s.kind = get_as<std::string>(field(cj, "kind", path), path + ".kind");
      s.curve = cj.value("curve", std::string());
      s.name = cj.value("name", s.kind + (s.curve.empty() ? "" : "(" + s.curve + ")"));
      s.order = cj.value("order", 0);
      if (cj.contains("elevate_to")) s.elevate_to = get_as<int>(cj.at("elevate_to"), path + ".elevate_to");
      parse_bound(cj, path, s.bound);
      if (cj.contains("scale")) s.scale = rational_field(cj.at("scale"), path + ".scale");
      if (cj.contains("axis")) s.axis = parse_axis(cj.at("axis"), path + ".axis");
      if (cj.contains("bound")) {
        const auto b = get_as<std::string>(cj.at("bound"), path + ".bound");
        if (b != "nominal" && b != "certified")
          throw ConfigError(path + ".bound: must be 'nominal' or 'certified'");
        s.certified = b == "certified";
      }
      if (s.kind == "relation") {
        s.expr = get_as<std::string>(field(cj, "expr", path), path + ".expr");
        try {
          s.rel = parse_rel(get_as<std::string>(field(cj, "rel", path), path + ".rel"));
        } catch (const ParseError& e) {
          throw ConfigError(path + ".rel: " + e.what());
        }
      } else if (s.kind == "vehicle_input") {
        if (c.model != ModelKind::Vehicle) throw ConfigError(path + ": vehicle_input needs the vehicle model");
      } else if (s.kind == "tilt" || s.kind == "hover_torque" || s.kind == "yaw_torque") {
        if (c.model != ModelKind::Quadrotor)
          throw ConfigError(path + ": " + s.kind + " needs the quadrotor model");
      } else if (s.kind != "derivative") {
        throw ConfigError(path + ".kind: unknown constraint kind '" + s.kind + "'");
      }
      if (s.kind != "relation" && !c.has_curve(s.curve))
        throw ConfigError(path + ".curve: no curve named '" + s.curve + "'");
      c.constraints.push_back(std::move(s));
    }
  }

  if (j.contains("endpoints")) {
    const auto& arr = j.at("endpoints");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "endpoints[" + std::to_string(i) + "]";
      EndpointSpec e;
      e.curve = get_as<std::string>(field(arr[i], "curve", path), path + ".curve");
      if (!c.has_curve(e.curve)) throw ConfigError(path + ".curve: no curve named '" + e.curve + "'");
      e.order = arr[i].value("order", 0);
      e.t0 = rational_list(field(arr[i], "t0", path), path + ".t0");
      e.tf = rational_list(field(arr[i], "tf", path), path + ".tf");
      c.endpoints.push_back(std::move(e));
    }
  }

  if (j.contains("box")) {
    const auto& arr = j.at("box");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "box[" + std::to_string(i) + "]";
      ParamRange r;
      r.name = get_as<std::string>(field(arr[i], "name", path), path + ".name");
      r.lo = bound_from_json(field(arr[i], "lo", path), path + ".lo");
      r.hi = bound_from_json(field(arr[i], "hi", path), path + ".hi");
      c.box.push_back(std::move(r));
    }
  }
  if (j.contains("fixed"))
    for (const auto& [k, v] : j.at("fixed").items()) c.fixed.emplace(k, rational_field(v, "fixed." + k));

  if (j.contains("region")) {
    const auto& r = j.at("region");
    if (r.contains("min_width")) c.region.min_width = number_field(r.at("min_width"), "region.min_width");
    if (r.contains("budget")) c.region.budget = get_as<std::size_t>(r.at("budget"), "region.budget");
    if (r.contains("seed")) c.region.seed = get_as<std::uint64_t>(r.at("seed"), "region.seed");
    if (r.contains("samples")) c.region.samples = get_as<std::size_t>(r.at("samples"), "region.samples");
    if (!(c.region.min_width > 0)) throw ConfigError("region.min_width: must be positive");
  }

  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    auto& sim = c.simulation;
    if (s.contains("mode")) {
      const auto m = get_as<std::string>(s.at("mode"), "simulation.mode");
      if (m == "open")
        sim.modes = {LoopMode::OpenLoop};
      else if (m == "closed")
        sim.modes = {LoopMode::ClosedLoop};
      else if (m == "both")
        sim.modes = {LoopMode::OpenLoop, LoopMode::ClosedLoop};
      else
        throw ConfigError("simulation.mode: must be 'open', 'closed' or 'both'");
    }
    if (s.contains("h")) sim.h = number_field(s.at("h"), "simulation.h");
    if (!(sim.h > 0)) throw ConfigError("simulation.h: must be positive");
    if (s.contains("lambda")) sim.lambda = number_field(s.at("lambda"), "simulation.lambda");
    if (s.contains("v0_offset")) sim.v0_offset = number_field(s.at("v0_offset"), "simulation.v0_offset");
    if (s.contains("translational_gains"))
      sim.translational_gains = number_list(s.at("translational_gains"), "simulation.translational_gains");
    if (s.contains("yaw_gains")) sim.yaw_gains = number_list(s.at("yaw_gains"), "simulation.yaw_gains");
    if (s.contains("ic_offset")) sim.ic_offset = number_list(s.at("ic_offset"), "simulation.ic_offset");
    if (s.contains("limits")) {
      std::vector<Limit> ls;
      const auto& arr = s.at("limits");
      for (std::size_t i = 0; i < arr.size(); ++i)
        ls.push_back(parse_limit(arr[i], "simulation.limits[" + std::to_string(i) + "]"));
      sim.limits = std::move(ls);
    }
    if (s.contains("point"))
      for (const auto& [k, v] : s.at("point").items())
        sim.point.emplace(k, rational_field(v, "simulation.point." + k));
  }

  if (j.contains("envelope")) {
    const auto& e = j.at("envelope");
    EnvelopeSettings es;
    if (e.contains("curves")) es.curves = get_as<std::vector<std::string>>(e.at("curves"), "envelope.curves");
    for (const auto& n : es.curves)
      if (!c.has_curve(n)) throw ConfigError("envelope.curves: no curve named '" + n + "'");
    if (e.contains("elevate_to")) es.elevate_to = get_as<int>(e.at("elevate_to"), "envelope.elevate_to");
    es.x_curve = e.value("x_curve", es.x_curve);
    es.y_curve = e.value("y_curve", es.y_curve);
    if (e.contains("obstacles")) {
      const auto& arr = e.at("obstacles");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "envelope.obstacles[" + std::to_string(i) + "]";
        Obstacle o;
        o.name = arr[i].value("name", "obstacle" + std::to_string(i));
        const auto xs = number_list(field(arr[i], "x", path), path + ".x");
        const auto ys = number_list(field(arr[i], "y", path), path + ".y");
        if (xs.size() != 2 || ys.size() != 2 || !(xs[0] <= xs[1]) || !(ys[0] <= ys[1]))
          throw ConfigError(path + ": x and y must be [lo, hi] pairs");
        o.rect = {xs[0], xs[1], ys[0], ys[1]};
        if (arr[i].contains("tau")) {
          const auto t = number_list(arr[i].at("tau"), path + ".tau");
          if (t.size() != 2) throw ConfigError(path + ".tau: expected [tau1, tau2]");
          o.tau1 = t[0];
          o.tau2 = t[1];
        }
        es.obstacles.push_back(o);
      }
    }
    c.envelope = std::move(es);
  }

  // Degree requirements per model.
  if (c.model == ModelKind::Vehicle)
    for (const auto& s : c.constraints)
      if (s.kind == "vehicle_input" && c.curve(s.curve).control_points.size() < 3)
        throw ConfigError("curves." + s.curve + ": vehicle reference needs degree >= 2");
  if (c.model == ModelKind::Quadrotor) {
    for (const char* n : {"x", "y"})
      if (c.has_curve(n) && c.curve(n).control_points.size() < 5)
        throw ConfigError(std::string("curves.") + n + ": quadrotor reference needs degree >= 4");
    if (c.has_curve("psi") && c.curve("psi").control_points.size() < 3)
      throw ConfigError("curves.psi: yaw reference needs degree >= 2");
  }
  return c;
}

inline ProjectConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------

inline BezierCurve<PolyExpr> symbolic(const CurveSpec& c) {
  return symbolic_curve(c.control_points, c.horizon);
}

namespace detail {

inline BezierCurve<PolyExpr> maybe_elevate(BezierCurve<PolyExpr> c, const std::optional<int>& to,
                                           const std::string& name) {
  if (!to) return c;
  if (*to < c.degree())
    throw ConfigError(name + ": elevate_to " + std::to_string(*to) + " is below degree " +
                      std::to_string(c.degree()));
  return c.elevate_to(*to);
}

inline CurveBound symmetric(double limit, bool strict) {
  const Rational v = decimal_rational(limit);
  return {Rational(-v), v, strict, strict};
}

}  // namespace detail

/// Relations emitted for one constraint declaration, plus the curve they bound.
inline std::vector<Relation> constraint_relations(const ProjectConfig& cfg, const ConstraintSpec& s) {
  if (s.kind == "relation") {
    try {
      return {{s.name, s.name, parse_poly(s.expr), s.rel}};
    } catch (const ParseError& e) {
      throw ConfigError("constraint '" + s.name + "': " + e.what());
    }
  }
  const auto base = symbolic(cfg.curve(s.curve));
  BezierCurve<PolyExpr> target = base;
  CurveBound b = s.bound;
  if (s.kind == "vehicle_input") {
    target = vehicle_input_curve(base, cfg.vehicle);
  } else if (s.kind == "derivative") {
    if (s.order < 0 || s.order > base.degree())
      throw ConfigError("constraint '" + s.name + "': order outside 0..degree");
    target = base.derivative(s.order).scaled(PolyExpr(s.scale));
  } else if (s.kind == "tilt") {
    const auto t = s.certified ? quad_tilt_bound_certified(cfg.sigmoid, cfg.quad, s.axis)
                               : quad_tilt_bound(cfg.sigmoid, cfg.quad, s.axis);
    target = base.derivative(2);
    b = {decimal_rational(t.lo), decimal_rational(t.hi), true, true};
  } else if (s.kind == "hover_torque") {
    target = quad_hover_torque_sym(base, cfg.quad, s.axis);
    b = detail::symmetric(s.axis == Axis::X ? cfg.quad.U2max : cfg.quad.U3max, false);
  } else if (s.kind == "yaw_torque") {
    target = quad_yaw_torque_sym(base, cfg.quad);
    b = detail::symmetric(cfg.quad.U4max, false);
  }
  if (!b.lo && !b.hi) throw ConfigError("constraint '" + s.name + "': needs lo and/or hi");
  target = detail::maybe_elevate(std::move(target), s.elevate_to, "constraint '" + s.name + "'");
  return bound_curve(target, b, s.name);
}

/// Endpoint pins merged with the explicit `fixed` map.
inline std::map<std::string, Rational> pinned_parameters(const ProjectConfig& cfg) {
  std::map<std::string, Rational> fixed = cfg.fixed;
  for (const auto& e : cfg.endpoints) {
    auto curve = symbolic(cfg.curve(e.curve));
    auto pins = endpoint_conditions(curve.map([&](const PolyExpr& p) { return p.partial_substitute(fixed); }),
                                    e.order, e.t0, e.tf);
    for (auto& [k, v] : pins)
      if (!fixed.emplace(k, v).second) throw ConfigError("endpoints: parameter '" + k + "' pinned twice");
  }
  return fixed;
}

inline ConstraintSystem build_system(const ProjectConfig& cfg) {
  std::vector<Relation> rels;
  for (const auto& s : cfg.constraints) {
    auto r = constraint_relations(cfg, s);
    rels.insert(rels.end(), r.begin(), r.end());
  }
  return compile(rels, cfg.box, pinned_parameters(cfg));
}

/// Parameter bindings for a chosen point: pinned values plus the point
/// coordinates in system-parameter order.
inline std::map<std::string, Rational> bind_all(const ConstraintSystem& sys,
                                                const std::vector<Rational>& point) {
  auto b = bind_point(sys, point);
  for (const auto& [k, v] : sys.fixed) b.emplace(k, v);
  return b;
}

inline BezierCurve<double> numeric_curve(const ProjectConfig& cfg, const std::string& name,
                                         const std::map<std::string, Rational>& bindings) {
  return to_double(substitute(symbolic(cfg.curve(name)), bindings));
}

}  // namespace flatbez
