#pragma once

// Experiment configuration, read from a JSON tree. Every key is optional;
// missing keys keep the defaults below.
//
// {
//   "manifold":   {"topology": "suspension" | "capped",
//                  "cross_section": {"kind": "circle", "c": 0.8} | {"kind": "sphere", "d": 2},
//                  "warp": {"kind": "sine", "scale": 1.0} | {"kind": "linear"},
//                  "radius": 1.0, "collar": 0.5},
//   "weights":    {"gamma": -0.5, "p": 8, "q": 8, "s0": 0, "pole_cutoff": 10},
//   "grid":       {"N": 128, "K": 32, "x_min": 1e-5, "body_transition": 2},
//   "solve":      {"m": 2, "T": 1, "dt_init": 1e-4, "dt_min": 1e-12, "dt_max": 0.05,
//                  "newton": false, "tolerance": 1e-5, "adaptive": true,
//                  "frame_interval": 0.1, "output_times": []},
//   "weak":       {"levels": 6, "schedule": [], "gap_tolerance": 1e-3},
//   "tolerances": {"ordering": 1e-8, "mass": 1e-8, "bounds": 1e-8, "oracle": 1e-3,
//                  "energy_slack": 1e-6, "monotonicity": 1e-10},
//   "suites": ["comparison", "bounds", "smoothing"],
//   "seed": 1,
//   "output": "out"
// }

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "conepme/evolution.hpp"
#include "conepme/geometry.hpp"
#include "conepme/grid.hpp"
#include "json.hpp"

namespace conepme::harness {

struct Tolerances {
  double ordering = 1e-8;
  double mass = 1e-8;
  double bounds = 1e-8;
  double oracle = 1e-3;
  double energy_slack = 1e-6;
  double monotonicity = 1e-10;
};

struct WeakSettings {
  int levels = 6;
  std::vector<double> schedule;
  double gap_tolerance = 1e-3;
};

struct ExperimentConfig {
  ConeManifold manifold = ConeManifold::suspension(CrossSection::circle(0.8));
  WeightParams weights;
  GridSpec grid;
  SolveControls solve;
  WeakSettings weak;
  Tolerances tolerances;
  std::vector<std::string> suites{"comparison", "bounds", "smoothing"};
  std::uint64_t seed = 1;
  std::string output = "out";
};

// Malformed keys or values; `what()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, std::vector<std::string> violations = {})
      : std::runtime_error(msg), violations(std::move(violations)) {}
  std::vector<std::string> violations;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

// Throws ConfigError listing every violation: manifold invariants, weight
// constraints, grid sizes, solve controls, unknown suite names.
WeightConfig validate_config(const ExperimentConfig& c);

// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

const std::vector<std::string>& known_suites();

}  // namespace conepme::harness
