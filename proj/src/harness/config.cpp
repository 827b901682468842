#include "conepme/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace conepme::harness {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for " + where + "." + key);
  }
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& item : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; }))
      throw ConfigError("unknown key " + where + "." + item.key());
  }
}

ConeManifold manifold_from_json(const json& j) {
  require_object(j, "manifold");
  reject_unknown(j, "manifold", {"topology", "cross_section", "warp", "radius", "collar"});
  std::string topology = "suspension";
  read(j, "topology", topology, "manifold");

  CrossSection cs = CrossSection::circle(0.8);
  if (j.contains("cross_section")) {
    const json& c = j.at("cross_section");
    require_object(c, "manifold.cross_section");
    reject_unknown(c, "manifold.cross_section", {"kind", "c", "d"});
    std::string kind = "circle";
    read(c, "kind", kind, "manifold.cross_section");
    if (kind == "circle") {
      double scale = 0.8;
      read(c, "c", scale, "manifold.cross_section");
      cs = CrossSection::circle(scale);
    } else if (kind == "sphere") {
      int d = 2;
      read(c, "d", d, "manifold.cross_section");
      cs = CrossSection::sphere(d);
    } else {
      throw ConfigError("unknown cross-section kind '" + kind + "'");
    }
  }

  WarpProfile warp = topology == "suspension" ? WarpProfile::sine(1.0) : WarpProfile::linear();
  if (j.contains("warp")) {
    const json& w = j.at("warp");
    require_object(w, "manifold.warp");
    reject_unknown(w, "manifold.warp", {"kind", "scale"});
    std::string kind = warp.kind == WarpProfile::Kind::sine ? "sine" : "linear";
    read(w, "kind", kind, "manifold.warp");
    double scale = 1.0;
    read(w, "scale", scale, "manifold.warp");
    if (kind == "sine")
      warp = WarpProfile::sine(scale);
    else if (kind == "linear")
      warp = WarpProfile::linear();
    else
      throw ConfigError("unknown warp kind '" + kind + "'");
  }

  ConeManifold m;
  if (topology == "suspension") {
    m = ConeManifold::suspension(cs, warp.scale);
    m.warp = warp;
  } else if (topology == "capped") {
    double radius = 1.0;
    read(j, "radius", radius, "manifold");
    m = ConeManifold::capped(cs, radius, warp);
  } else {
    throw ConfigError("unknown topology '" + topology + "'");
  }
  read(j, "collar", m.collar_length, "manifold");
  return m;
}

json manifold_to_json(const ConeManifold& m) {
  json j;
  j["topology"] = m.topology == ConeManifold::Topology::suspension ? "suspension" : "capped";
  if (m.cross_section.kind == CrossSection::Kind::circle)
    j["cross_section"] = {{"kind", "circle"}, {"c", m.cross_section.circumference_scale}};
  else
    j["cross_section"] = {{"kind", "sphere"}, {"d", m.cross_section.sphere_dim}};
  if (m.warp.kind == WarpProfile::Kind::sine)
    j["warp"] = {{"kind", "sine"}, {"scale", m.warp.scale}};
  else
    j["warp"] = {{"kind", "linear"}};
  if (m.topology == ConeManifold::Topology::capped_cone) j["radius"] = m.outer_radius;
  j["collar"] = m.collar_length;
  return j;
}

}  // namespace

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names{"comparison", "bounds", "smoothing", "weak"};
  return names;
}

ExperimentConfig config_from_json(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "config", {"manifold", "weights", "grid", "solve", "weak", "tolerances", "suites", "seed", "output"});
  ExperimentConfig c;
  if (j.contains("manifold")) c.manifold = manifold_from_json(j.at("manifold"));

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    require_object(w, "weights");
    reject_unknown(w, "weights", {"gamma", "p", "q", "s0", "pole_cutoff"});
    read(w, "gamma", c.weights.gamma, "weights");
    read(w, "p", c.weights.p, "weights");
    read(w, "q", c.weights.q, "weights");
    read(w, "s0", c.weights.s0, "weights");
    read(w, "pole_cutoff", c.weights.pole_cutoff, "weights");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    require_object(g, "grid");
    reject_unknown(g, "grid", {"N", "K", "x_min", "body_transition"});
    read(g, "N", c.grid.radial_nodes, "grid");
    read(g, "K", c.grid.angular_nodes, "grid");
    read(g, "x_min", c.grid.x_min, "grid");
    read(g, "body_transition", c.grid.body_transition, "grid");
  }
  if (j.contains("solve")) {
    const json& s = j.at("solve");
    require_object(s, "solve");
    reject_unknown(s, "solve",
                   {"m", "T", "dt_init", "dt_min", "dt_max", "newton", "tolerance", "sweep_tolerance", "max_sweeps",
                    "adaptive", "frame_interval", "output_times"});
    SolveControls& sc = c.solve;
    read(s, "m", sc.m, "solve");
    read(s, "T", sc.T, "solve");
    read(s, "dt_init", sc.dt_init, "solve");
    read(s, "dt_min", sc.dt_min, "solve");
    read(s, "dt_max", sc.dt_max, "solve");
    read(s, "newton", sc.newton, "solve");
    read(s, "tolerance", sc.tolerance, "solve");
    read(s, "sweep_tolerance", sc.sweep_tolerance, "solve");
    read(s, "max_sweeps", sc.max_sweeps, "solve");
    read(s, "adaptive", sc.adaptive, "solve");
    read(s, "frame_interval", sc.frame_interval, "solve");
    read(s, "output_times", sc.output_times, "solve");
  }
  if (j.contains("weak")) {
    const json& w = j.at("weak");
    require_object(w, "weak");
    reject_unknown(w, "weak", {"levels", "schedule", "gap_tolerance"});
    read(w, "levels", c.weak.levels, "weak");
    read(w, "schedule", c.weak.schedule, "weak");
    read(w, "gap_tolerance", c.weak.gap_tolerance, "weak");
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    require_object(t, "tolerances");
    reject_unknown(t, "tolerances", {"ordering", "mass", "bounds", "oracle", "energy_slack", "monotonicity"});
    read(t, "ordering", c.tolerances.ordering, "tolerances");
    read(t, "mass", c.tolerances.mass, "tolerances");
    read(t, "bounds", c.tolerances.bounds, "tolerances");
    read(t, "oracle", c.tolerances.oracle, "tolerances");
    read(t, "energy_slack", c.tolerances.energy_slack, "tolerances");
    read(t, "monotonicity", c.tolerances.monotonicity, "tolerances");
  }
  read(j, "suites", c.suites, "config");
  read(j, "seed", c.seed, "config");
  read(j, "output", c.output, "config");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["manifold"] = manifold_to_json(c.manifold);
  j["weights"] = {{"gamma", c.weights.gamma},
                  {"p", c.weights.p},
                  {"q", c.weights.q},
                  {"s0", c.weights.s0},
                  {"pole_cutoff", c.weights.pole_cutoff}};
  j["grid"] = {{"N", c.grid.radial_nodes},
               {"K", c.grid.angular_nodes},
               {"x_min", c.grid.x_min},
               {"body_transition", c.grid.body_transition}};
  const SolveControls& s = c.solve;
  j["solve"] = {{"m", s.m},
                {"T", s.T},
                {"dt_init", s.dt_init},
                {"dt_min", s.dt_min},
                {"dt_max", s.dt_max},
                {"newton", s.newton},
                {"tolerance", s.tolerance},
                {"sweep_tolerance", s.sweep_tolerance},
                {"max_sweeps", s.max_sweeps},
                {"adaptive", s.adaptive},
                {"frame_interval", s.frame_interval},
                {"output_times", s.output_times}};
  j["weak"] = {{"levels", c.weak.levels}, {"schedule", c.weak.schedule}, {"gap_tolerance", c.weak.gap_tolerance}};
  j["tolerances"] = {{"ordering", c.tolerances.ordering},         {"mass", c.tolerances.mass},
                     {"bounds", c.tolerances.bounds},             {"oracle", c.tolerances.oracle},
                     {"energy_slack", c.tolerances.energy_slack}, {"monotonicity", c.tolerances.monotonicity}};
  j["suites"] = c.suites;
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

WeightConfig validate_config(const ExperimentConfig& c) {
  std::vector<std::string> v;
  auto attempt = [&](auto&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      v.emplace_back(e.what());
    }
  };
  bool manifold_ok = true;
  attempt([&] {
    try {
      c.manifold.check();
    } catch (...) {
      manifold_ok = false;
      throw;
    }
  });
  WeightConfig wc;
  if (manifold_ok) {
    wc = validate_params(c.manifold, c.weights);
    for (const auto& s : wc.violations) v.push_back(s);
    attempt([&] { make_grid(c.manifold, c.grid); });
  }
  attempt([&] { c.solve.check(); });
  if (c.weak.levels < 1) v.emplace_back("weak.levels must be at least 1");
  for (std::size_t k = 0; k < c.weak.schedule.size(); ++k)
    if (!(c.weak.schedule[k] > 0.0) || (k > 0 && !(c.weak.schedule[k] < c.weak.schedule[k - 1])))
      v.emplace_back("weak.schedule must be positive and strictly decreasing");
  for (const auto& s : c.suites)
    if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
      v.push_back("unknown suite '" + s + "'");
  if (!v.empty()) throw ConfigError("invalid configuration", v);
  return wc;
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace conepme::harness
