#pragma once

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flatbez/config.hpp"
#include "flatbez/envelope.hpp"
#include "flatbez/io.hpp"
#include "flatbez/region.hpp"
#include "flatbez/simulate.hpp"

namespace flatbez::cli {

/// Exit codes shared by every command.
enum Exit : int {
  kOk = 0,
  kNegative = 1,  ///< check: infeasible point; simulate --strict: violations; runtime failure
  kUsage = 2,
  kConfig = 3,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string system;
  std::string point;
  std::string out_dir = ".";
  std::optional<double> min_width;
  std::optional<std::size_t> budget;
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

/// "2, 2.3, 6/5" → exact rationals.
inline std::vector<Rational> parse_point(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_rational(item));
    } catch (const ParseError& e) {
      throw UsageError("--point: " + std::string(e.what()));
    }
  }
  if (out.empty()) throw UsageError("--point: no coordinates");
  return out;
}

namespace detail {

inline std::filesystem::path out_path(const Options& o, const std::string& file) {
  std::filesystem::create_directories(o.out_dir);
  return std::filesystem::path(o.out_dir) / file;
}

inline std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

struct Loaded {
  std::optional<ProjectConfig> config;
  ConstraintSystem system;
  std::string stem;
};

inline Loaded load_system(const Options& o) {
  Loaded l;
  if (!o.system.empty()) {
    l.system = system_from_json(read_json_file(o.system));
    l.stem = std::filesystem::path(o.system).stem().string();
    if (l.stem.size() > 7 && l.stem.ends_with(".system")) l.stem.resize(l.stem.size() - 7);
    if (!o.config.empty()) l.config = load_config(o.config);
  } else if (!o.config.empty()) {
    l.config = load_config(o.config);
    l.system = build_system(*l.config);
    l.stem = l.config->name;
  } else {
    throw UsageError("need --system or --config");
  }
  return l;
}

/// Point from --point, else from the config's simulation.point.
inline std::vector<Rational> chosen_point(const Options& o, const Loaded& l) {
  std::vector<Rational> p;
  if (!o.point.empty()) {
    p = parse_point(o.point);
  } else if (l.config && !l.config->simulation.point.empty()) {
    for (const auto& name : l.system.parameters()) {
      auto it = l.config->simulation.point.find(name);
      if (it == l.config->simulation.point.end())
        throw ConfigError("simulation.point: missing parameter '" + name + "'");
      p.push_back(it->second);
    }
  } else if (l.system.dimension() != 0) {
    throw UsageError("need --point");
  }
  if (p.size() != l.system.dimension())
    throw UsageError("--point: expected " + std::to_string(l.system.dimension()) +
                     " coordinates (" + join(l.system.parameters()) + "), got " +
                     std::to_string(p.size()));
  return p;
}

inline std::string mode_name(LoopMode m) { return m == LoopMode::OpenLoop ? "open" : "closed"; }

}  // namespace detail

inline int cmd_compile(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw UsageError("compile needs --config");
  const auto cfg = load_config(o.config);
  const auto sys = build_system(cfg);
  const auto path = detail::out_path(o, cfg.name + ".system.json");
  write_text_file(path.string(), dump(to_json(sys)));
  out << "relations: " << sys.relations.size() << '\n'
      << "groups: " << sys.stats.retained_groups << " (emitted " << sys.stats.emitted_groups
      << ", dropped " << sys.stats.dropped_tautologies << " constant relations)\n"
      << "parameters: " << detail::join(sys.parameters()) << '\n';
  if (!sys.fixed.empty()) {
    out << "fixed:";
    for (const auto& [k, v] : sys.fixed) out << ' ' << k << '=' << to_string(v);
    out << '\n';
  }
  out << "wrote " << path.string() << '\n';
  return kOk;
}

inline int cmd_region(const Options& o, std::ostream& out) {
  const auto l = detail::load_system(o);
  RegionSettings rs = l.config ? l.config->region : RegionSettings{};
  if (o.min_width) rs.min_width = *o.min_width;
  if (o.budget) rs.budget = *o.budget;
  if (o.seed) rs.seed = *o.seed;
  const auto region = branch_and_prune(l.system, rs.min_width, rs.budget);
  Json j = to_json(region, rs.min_width, rs.budget);
  if (rs.samples > 0) {
    const auto mc = sample_oracle(l.system, rs.samples, rs.seed, 0);
    j["oracle"] = {{"samples", mc.samples}, {"seed", rs.seed}, {"fraction", mc.fraction()},
                   {"std_error", mc.std_error()}};
  }
  const auto jp = detail::out_path(o, l.stem + ".region.json");
  const auto cp = detail::out_path(o, l.stem + ".region.csv");
  write_text_file(jp.string(), dump(j));
  std::ostringstream csv;
  write_region_csv(csv, region);
  write_text_file(cp.string(), csv.str());
  out << "inside: " << region.inside.size() << " boxes, outside: " << region.outside.size()
      << ", boundary: " << region.boundary.size() << '\n'
      << "inside fraction: " << format_double(region.inside_fraction()) << '\n'
      << "partial: " << (region.stats.partial ? "yes" : "no") << '\n';
  if (j.contains("oracle"))
    out << "sampled fraction: " << format_double(j["oracle"]["fraction"].get<double>()) << " +- "
        << format_double(j["oracle"]["std_error"].get<double>()) << " (n=" << rs.samples << ")\n";
  out << "wrote " << jp.string() << " and " << cp.string() << '\n';
  return kOk;
}

inline int cmd_check(const Options& o, std::ostream& out) {
  if (o.point.empty()) throw UsageError("check needs --point");
  const auto l = detail::load_system(o);
  const auto p = detail::chosen_point(o, l);
  const auto rep = membership(l.system, p);
  for (const auto& name : rep.box_violations) out << "outside box: " << name << '\n';
  for (const auto& r : rep.relations)
    out << (r.satisfied ? "ok   " : "FAIL ") << r.name << ": " << to_string(r.value) << ' '
        << to_string(r.rel) << " 0 (slack " << format_double(r.slack) << ")\n";
  out << (rep.feasible ? "feasible" : "infeasible") << '\n';
  if (o.out_dir != ".") {
    const auto path = detail::out_path(o, l.stem + ".check.json");
    write_text_file(path.string(), dump(to_json(rep, l.system)));
  }
  return rep.feasible ? kOk : kNegative;
}

namespace detail {

inline std::vector<Limit> vehicle_limits(const ProjectConfig& cfg) {
  if (cfg.simulation.limits) return *cfg.simulation.limits;
  for (const auto& s : cfg.constraints)
    if (s.kind == "vehicle_input") {
      Limit l{"u", Limit::Channel::Input, 0, std::nullopt, std::nullopt, s.bound.lo_strict,
              s.bound.hi_strict};
      if (s.bound.lo) l.lo = to_double(*s.bound.lo);
      if (s.bound.hi) l.hi = to_double(*s.bound.hi);
      return {l};
    }
  return {};
}

inline std::string write_traj(const Options& o, const std::string& stem, const Trajectory& tr) {
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  const auto p = out_path(o, stem + ".csv");
  write_text_file(p.string(), csv.str());
  return p.string();
}

}  // namespace detail

inline int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw UsageError("simulate needs --config");
  Options so = o;
  so.system.clear();
  const auto l = detail::load_system(so);
  const auto& cfg = *l.config;
  const auto bindings = bind_all(l.system, detail::chosen_point(o, l));
  Json audit_json;
  audit_json["schema"] = kAuditSchema;
  audit_json["name"] = cfg.name;
  Json point = Json::object();
  for (const auto& [k, v] : bindings) point[k] = to_string(v);
  audit_json["point"] = point;
  Json runs = Json::array();
  bool violated = false;
  std::string error;

  if (cfg.model == ModelKind::Vehicle) {
    const std::string name = cfg.curves.at(0).name;
    const auto vx = numeric_curve(cfg, name, bindings);
    const auto limits = detail::vehicle_limits(cfg);
    for (auto mode : cfg.simulation.modes) {
      VehicleSimSettings vs{mode, cfg.simulation.lambda, cfg.simulation.h, cfg.simulation.v0_offset};
      const auto tr = simulate_vehicle(vx, cfg.vehicle, vs, limits);
      const auto rep = audit(tr, limits);
      violated = violated || !rep.compliant();
      const auto file = detail::write_traj(o, cfg.name + "." + detail::mode_name(mode), tr);
      Json r = to_json(rep);
      r["mode"] = detail::mode_name(mode);
      r["trajectory"] = file;
      r["summary"] = trajectory_summary(tr);
      runs.push_back(r);
      out << detail::mode_name(mode) << " loop: "
          << (rep.compliant() ? "compliant" : std::to_string(rep.entries.size()) + " violated limit(s)")
          << '\n';
    }
  } else if (cfg.model == ModelKind::Quadrotor) {
    const auto& q = cfg.quad;
    const double horizon = cfg.curve("x").horizon.get_d();
    const auto thrust = quad_thrust_curve(cfg.sigmoid, q, TimeGrid{0.0, horizon, cfg.simulation.h}.times());
    std::size_t flagged = 0;
    for (const auto& f : thrust.flags) flagged += !f.empty();
    audit_json["reference_thrust"] = {{"bound_lo", thrust.bound_lo},
                                      {"bound_hi", thrust.bound_hi},
                                      {"U1max", q.U1max},
                                      {"bound_within_limits", thrust.bound_within_limits},
                                      {"gamma_sq_c_limit", quad_gamma_sq_c_limit(q)},
                                      {"sampled_max", thrust.max()},
                                      {"violating_samples", flagged}};
    if (flagged || !thrust.bound_within_limits) violated = true;
    out << "reference thrust: max " << format_double(thrust.max()) << " N, bound ["
        << format_double(thrust.bound_lo) << ", " << format_double(thrust.bound_hi) << "], "
        << (flagged ? std::to_string(flagged) + " violating samples" : "within limits") << '\n';
    try {
      const auto x = numeric_curve(cfg, "x", bindings);
      const auto y = numeric_curve(cfg, "y", bindings);
      const auto psi = cfg.has_curve("psi") ? numeric_curve(cfg, "psi", bindings)
                                            : BezierCurve<double>({0.0, 0.0, 0.0}, horizon);
      const QuadReference ref(x, y, cfg.sigmoid, psi, q);
      const auto limits = cfg.simulation.limits ? *cfg.simulation.limits : quad_default_limits(q);
      for (auto mode : cfg.simulation.modes) {
        QuadSimSettings qs;
        qs.mode = mode;
        qs.tf = horizon;
        qs.h = cfg.simulation.h;
        qs.translational_gains = cfg.simulation.translational_gains;
        qs.yaw_gains = cfg.simulation.yaw_gains;
        qs.ic_offset = cfg.simulation.ic_offset;
        const auto tr = simulate_quadrotor(ref, qs, limits);
        const auto rep = audit(tr, limits);
        violated = violated || !rep.compliant();
        const auto file = detail::write_traj(o, cfg.name + "." + detail::mode_name(mode), tr);
        Json r = to_json(rep);
        r["mode"] = detail::mode_name(mode);
        r["trajectory"] = file;
        r["summary"] = trajectory_summary(tr);
        runs.push_back(r);
        out << detail::mode_name(mode) << " loop: "
            << (rep.compliant() ? "compliant" : std::to_string(rep.entries.size()) + " violated limit(s)")
            << '\n';
      }
    } catch (const SingularityError& e) {
      error = e.what();
    }
  } else {
    throw ConfigError("simulate: model 'polynomial' has no dynamics");
  }

  audit_json["runs"] = runs;
  if (!error.empty()) audit_json["error"] = error;
  audit_json["compliant"] = !violated && error.empty();
  const auto ap = detail::out_path(o, cfg.name + ".audit.json");
  write_text_file(ap.string(), dump(audit_json));
  out << "wrote " << ap.string() << '\n';
  if (!error.empty()) {
    out << "error: " << error << '\n';
    return kNegative;
  }
  return (o.strict && violated) ? kNegative : kOk;
}

inline int cmd_envelope(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw UsageError("envelope needs --config");
  Options so = o;
  so.system.clear();
  const auto l = detail::load_system(so);
  const auto& cfg = *l.config;
  const auto bindings = bind_all(l.system, detail::chosen_point(o, l));
  EnvelopeSettings es = cfg.envelope.value_or(EnvelopeSettings{});
  if (es.curves.empty())
    for (const auto& c : cfg.curves) es.curves.push_back(c.name);
  std::map<std::string, Envelope> envs;
  Json j;
  j["schema"] = "flatbez.envelope/1";
  Json curves = Json::array();
  for (const auto& name : es.curves) {
    auto c = numeric_curve(cfg, name, bindings);
    if (es.elevate_to) {
      if (*es.elevate_to < c.degree()) throw ConfigError("envelope.elevate_to: below curve degree");
      c = c.elevate_to(*es.elevate_to);
    }
    const auto env = build_envelope(c);
    std::ostringstream csv;
    write_envelope_csv(csv, env);
    const auto p = detail::out_path(o, cfg.name + ".envelope." + name + ".csv");
    write_text_file(p.string(), csv.str());
    curves.push_back({{"curve", name}, {"degree", c.degree()}, {"dmax", env.dmax}, {"file", p.string()}});
    out << name << ": degree " << c.degree() << ", dmax " << format_double(env.dmax) << '\n';
    envs.emplace(name, env);
  }
  j["curves"] = curves;
  Json obs = Json::array();
  for (const auto& ob : es.obstacles) {
    auto ix = envs.find(es.x_curve), iy = envs.find(es.y_curve);
    if (ix == envs.end() || iy == envs.end())
      throw ConfigError("envelope.obstacles: needs envelopes for '" + es.x_curve + "' and '" +
                        es.y_curve + "'");
    const bool clear = obstacle_clear(ix->second, iy->second, ob.rect, ob.tau1, ob.tau2);
    obs.push_back({{"name", ob.name}, {"clear", clear}});
    out << "obstacle " << ob.name << ": " << (clear ? "clear" : "overlaps envelope") << '\n';
  }
  j["obstacles"] = obs;
  const auto jp = detail::out_path(o, cfg.name + ".envelope.json");
  write_text_file(jp.string(), dump(j));
  out << "wrote " << jp.string() << '\n';
  return kOk;
}

/// Entry point used by the executable; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Constrained Bezier reference design for flat systems"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sc) {
    sc->add_option("--config", o.config, "Project config (JSON)");
    sc->add_option("--out-dir", o.out_dir, "Directory for output files");
  };
  auto* compile = app.add_subcommand("compile", "Build the constraint system from a config");
  common(compile);
  auto* region = app.add_subcommand("region", "Inner approximation of the feasible parameter set");
  common(region);
  region->add_option("--system", o.system, "Constraint system (JSON)");
  region->add_option("--min-width", o.min_width, "Smallest box width to split");
  region->add_option("--budget", o.budget, "Maximum number of boxes processed");
  region->add_option("--seed", o.seed, "Seed for the Monte-Carlo estimate");
  auto* check = app.add_subcommand("check", "Exact membership of one parameter point");
  common(check);
  check->add_option("--system", o.system, "Constraint system (JSON)");
  check->add_option("--point", o.point, "Comma-separated coordinates");
  auto* sim = app.add_subcommand("simulate", "Open/closed-loop simulation and audit");
  common(sim);
  sim->add_option("--point", o.point, "Comma-separated coordinates");
  sim->add_flag("--strict", o.strict, "Exit 1 when the audit reports violations");
  auto* env = app.add_subcommand("envelope", "Envelopes and obstacle clearance");
  common(env);
  env->add_option("--point", o.point, "Comma-separated coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (*compile) return cmd_compile(o, out);
    if (*region) return cmd_region(o, out);
    if (*check) return cmd_check(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*env) return cmd_envelope(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNegative;
  }
  return kUsage;
}

}  // namespace flatbez::cli
