#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatbez/constraints.hpp"
#include "flatbez/errors.hpp"
#include "flatbez/rational.hpp"
#include "flatbez/region.hpp"
#include "flatbez/simulate.hpp"

namespace flatbez {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSystemSchema = "flatbez.constraint_system/1";
inline constexpr const char* kRegionSchema = "flatbez.region/1";
inline constexpr const char* kAuditSchema = "flatbez.audit/1";

// ---------------------------------------------------------------------------
// ConstraintSystem

namespace detail {

inline Json bound_json(const std::optional<Rational>& v, const char* inf) {
  return v ? Json(to_string(*v)) : Json(inf);
}

inline std::optional<Rational> bound_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return decimal_rational(j.get<double>());
  if (!j.is_string()) throw ConfigError(path + ": expected a rational string or number");
  const auto s = j.get<std::string>();
  if (s == "inf" || s == "+inf" || s == "-inf") return std::nullopt;
  try {
    return parse_rational(s);
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + ": missing field '" + key + "'");
  return j.at(key);
}

inline void require_schema(const Json& j, const char* schema, const std::string& what) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
    throw ConfigError(what + ": expected schema '" + schema + "'");
}

}  // namespace detail

inline Json to_json(const ConstraintSystem& sys) {
  Json j;
  j["schema"] = kSystemSchema;
  Json params = Json::array();
  for (const auto& b : sys.box)
    params.push_back({{"name", b.name},
                      {"lo", detail::bound_json(b.lo, "-inf")},
                      {"hi", detail::bound_json(b.hi, "inf")}});
  j["parameters"] = params;
  Json fixed = Json::object();
  for (const auto& [k, v] : sys.fixed) fixed[k] = to_string(v);
  j["fixed"] = fixed;
  Json rels = Json::array();
  for (const auto& r : sys.relations)
    rels.push_back({{"name", r.name}, {"group", r.group}, {"expr", r.expr.render()},
                    {"rel", to_string(r.rel)}});
  j["relations"] = rels;
  j["stats"] = {{"emitted_groups", sys.stats.emitted_groups},
                {"retained_groups", sys.stats.retained_groups},
                {"dropped_tautologies", sys.stats.dropped_tautologies}};
  return j;
}

inline ConstraintSystem system_from_json(const Json& j) {
  detail::require_schema(j, kSystemSchema, "constraint system");
  ConstraintSystem sys;
  const auto& params = detail::field(j, "parameters", "system");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string path = "system.parameters[" + std::to_string(i) + "]";
    const auto& p = params[i];
    sys.box.push_back({detail::field(p, "name", path).get<std::string>(),
                       detail::bound_from_json(detail::field(p, "lo", path), (path + ".lo").c_str()),
                       detail::bound_from_json(detail::field(p, "hi", path), (path + ".hi").c_str())});
  }
  if (j.contains("fixed"))
    for (const auto& [k, v] : j.at("fixed").items()) {
      auto q = detail::bound_from_json(v, "system.fixed." + k);
      if (!q) throw ConfigError("system.fixed." + k + ": must be finite");
      sys.fixed.emplace(k, *q);
    }
  const auto& rels = detail::field(j, "relations", "system");
  for (std::size_t i = 0; i < rels.size(); ++i) {
    const std::string path = "system.relations[" + std::to_string(i) + "]";
    const auto& r = rels[i];
    Relation rel;
    rel.name = detail::field(r, "name", path).get<std::string>();
    rel.group = r.value("group", rel.name);
    try {
      rel.expr = parse_poly(detail::field(r, "expr", path).get<std::string>());
      rel.rel = parse_rel(detail::field(r, "rel", path).get<std::string>());
    } catch (const ParseError& e) {
      throw ConfigError(path + ": " + e.what());
    }
    sys.relations.push_back(std::move(rel));
  }
  if (j.contains("stats")) {
    const auto& s = j.at("stats");
    sys.stats.emitted_groups = s.value("emitted_groups", std::size_t{0});
    sys.stats.retained_groups = s.value("retained_groups", std::size_t{0});
    sys.stats.dropped_tautologies = s.value("dropped_tautologies", std::size_t{0});
  }
  std::set<std::string> declared;
  for (const auto& b : sys.box) declared.insert(b.name);
  for (const auto& r : sys.relations)
    for (const auto& v : r.expr.variables())
      if (!declared.count(v))
        throw ConfigError("system: relation '" + r.name + "' uses undeclared parameter '" + v + "'");
  return sys;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// RegionApprox

namespace detail {
inline Json box_json(const RegionBox& b, const char* status) {
  Json lo = Json::array(), hi = Json::array();
  for (const auto& x : b.box) {
    lo.push_back(x.lo);
    hi.push_back(x.hi);
  }
  Json j{{"status", status}, {"lo", lo}, {"hi", hi}};
  if (std::string(status) == "inside") j["closure"] = b.closure;
  if (std::string(status) == "outside") j["violated"] = b.violated;
  return j;
}
}  // namespace detail

inline Json to_json(const RegionApprox& r, double min_width, std::size_t budget) {
  Json j;
  j["schema"] = kRegionSchema;
  j["parameters"] = r.parameters;
  j["settings"] = {{"min_width", min_width}, {"budget", budget}};
  j["stats"] = {{"inside", r.inside.size()},
                {"outside", r.outside.size()},
                {"boundary", r.boundary.size()},
                {"boxes_processed", r.stats.boxes_processed},
                {"max_depth", r.stats.max_depth},
                {"total_volume", r.stats.total_volume},
                {"inside_volume", r.stats.inside_volume},
                {"outside_volume", r.stats.outside_volume},
                {"boundary_volume", r.stats.boundary_volume},
                {"inside_fraction", r.inside_fraction()},
                {"partial", r.stats.partial}};
  Json boxes = Json::array();
  for (const auto& b : r.inside) boxes.push_back(detail::box_json(b, "inside"));
  for (const auto& b : r.outside) boxes.push_back(detail::box_json(b, "outside"));
  for (const auto& b : r.boundary) boxes.push_back(detail::box_json(b, "boundary"));
  j["boxes"] = boxes;
  return j;
}

/// One box per row: status, closure, violated, then lo/hi per parameter.
inline void write_region_csv(std::ostream& os, const RegionApprox& r) {
  os << "status,closure,violated";
  for (const auto& p : r.parameters) os << ',' << p << "_lo," << p << "_hi";
  os << '\n';
  auto rows = [&](const std::vector<RegionBox>& v, const char* status) {
    for (const auto& b : v) {
      os << status << ',' << (b.closure ? 1 : 0) << ',' << b.violated;
      for (const auto& x : b.box) os << ',' << format_double(x.lo) << ',' << format_double(x.hi);
      os << '\n';
    }
  };
  rows(r.inside, "inside");
  rows(r.outside, "outside");
  rows(r.boundary, "boundary");
}

// ---------------------------------------------------------------------------
// Membership, trajectory summary and audit

inline Json to_json(const MembershipReport& m, const ConstraintSystem& sys) {
  Json rels = Json::array();
  for (const auto& r : m.relations)
    rels.push_back({{"name", r.name}, {"rel", to_string(r.rel)}, {"value", to_string(r.value)},
                    {"slack", r.slack}, {"satisfied", r.satisfied}});
  return {{"feasible", m.feasible},
          {"parameters", sys.parameters()},
          {"in_box", m.in_box},
          {"box_violations", m.box_violations},
          {"relations", rels}};
}

inline Json to_json(const AuditReport& a) {
  Json entries = Json::array();
  for (const auto& e : a.entries)
    entries.push_back({{"name", e.name},
                       {"first_violation_time", e.first_violation_time},
                       {"worst_slack", e.worst_slack},
                       {"duration", e.duration},
                       {"samples", e.samples}});
  return {{"compliant", a.compliant()}, {"violations", entries}};
}

inline Json trajectory_summary(const Trajectory& tr) {
  Json j;
  j["samples"] = tr.size();
  j["t0"] = tr.times.empty() ? 0.0 : tr.times.front();
  j["tf"] = tr.times.empty() ? 0.0 : tr.times.back();
  j["state_names"] = tr.state_names;
  j["input_names"] = tr.input_names;
  if (!tr.states.empty()) {
    j["final_state"] = tr.states.back();
    j["final_input"] = tr.inputs.back();
  }
  return j;
}

}  // namespace flatbez
