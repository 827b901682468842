#include "conepme/harness/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "conepme/harness/acceptance.hpp"
#include "conepme/harness/config.hpp"
#include "conepme/harness/initial_data.hpp"
#include "conepme/harness/report.hpp"
#include "conepme/harness/suites.hpp"
#include "conepme/norms.hpp"
#include "conepme/weak.hpp"

namespace conepme::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::string resolve_output(const std::string& dir) {
  const char* root = std::getenv("CONEPME_OUTPUT_ROOT");
  if (!root || !*root || fs::path(dir).is_absolute()) return dir;
  return (fs::path(root) / dir).string();
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::string grid;
  std::optional<double> m, T;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool solve_flags) {
  app->add_option("--config", c.config_path, "JSON experiment config");
  app->add_option("--seed", c.seed, "RNG seed");
  if (solve_flags) {
    app->add_option("--m", c.m, "PME exponent");
    app->add_option("--T", c.T, "final time");
    app->add_option("--grid", c.grid, "grid size NxK");
    app->add_option("--out", c.out, "output directory");
  }
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  if (c.m) cfg.solve.m = *c.m;
  if (c.T) cfg.solve.T = *c.T;
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  if (!c.grid.empty()) {
    const auto x = c.grid.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument("");
      std::size_t used = 0;
      cfg.grid.radial_nodes = std::stoi(c.grid.substr(0, x), &used);
      if (used != x) throw std::invalid_argument("");
      cfg.grid.angular_nodes = std::stoi(c.grid.substr(x + 1), &used);
      if (used != c.grid.size() - x - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("--grid expects NxK, got '" + c.grid + "'");
    }
  }
  return cfg;
}

json weight_json(const WeightConfig& w) {
  return {{"gamma", w.params.gamma},
          {"p", w.params.p},
          {"q", w.params.q},
          {"s0", w.params.s0},
          {"window", {w.window.lower, w.window.upper}},
          {"epsilon_bar", w.epsilon_bar},
          {"valid", w.valid},
          {"violations", w.violations}};
}

json provenance(const ExperimentConfig& cfg) {
  return {{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"config", config_to_json(cfg)}};
}

json frame_json(const Frame& f) {
  return {{"t", f.t},
          {"mass", f.diag.mass},
          {"min", f.diag.min},
          {"max", f.diag.max},
          {"gradient_energy", f.diag.gradient_energy},
          {"modal_energy", f.diag.modal_energy}};
}

void write_trajectory(const std::string& dir, const Trajectory& t) {
  fs::create_directories(fs::path(dir) / "frames");
  json index = json::array();
  std::ofstream diag(fs::path(dir) / "diagnostics.jsonl");
  std::vector<double> ts, ms, lo, hi, en;
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    std::ostringstream name;
    name << "frames/u_" << std::setw(4) << std::setfill('0') << k << ".bin";
    save_field((fs::path(dir) / name.str()).string(), t.frames[k].u);
    index.push_back({{"t", t.frames[k].t}, {"file", name.str()}});
    diag << frame_json(t.frames[k]).dump() << '\n';
    ts.push_back(t.frames[k].t);
    ms.push_back(t.frames[k].diag.mass);
    lo.push_back(t.frames[k].diag.min);
    hi.push_back(t.frames[k].diag.max);
    en.push_back(t.frames[k].diag.gradient_energy);
  }
  write_json((fs::path(dir) / "frames.json").string(), index);
  write_series_csv((fs::path(dir) / "series.csv").string(), {"t", "mass", "min", "max", "gradient_energy"},
                   {ts, ms, lo, hi, en});
}

Field initial_field(const ExperimentConfig& cfg, const std::shared_ptr<const Grid>& g) {
  return random_smooth_field(g, cfg.seed, 1.0, 2.0);
}

int cmd_spectrum(const Common& c, int count, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  cfg.manifold.check();
  const IndicialData d = indicial_data(cfg.manifold, count);
  const auto spec = cross_section_spectrum(cfg.manifold.cross_section, count);
  json j;
  j["cross_section"] = cfg.manifold.cross_section.describe();
  j["n"] = cfg.manifold.n();
  j["epsilon_bar"] = d.epsilon_bar;
  const double l1 = spec.size() > 1 ? spec[1].value : cross_section_eigenvalue(cfg.manifold.cross_section, 1);
  const WeightWindow w = weight_window(cfg.manifold.n(), l1);
  j["window"] = {w.lower, w.upper};
  j["modes"] = json::array();
  for (std::size_t k = 0; k < d.entries.size(); ++k)
    j["modes"].push_back({{"j", k},
                          {"lambda", d.entries[k].lambda},
                          {"multiplicity", k < spec.size() ? spec[k].multiplicity : 0},
                          {"q_minus", d.entries[k].roots.minus},
                          {"q_plus", d.entries[k].roots.plus},
                          {"double_root", d.entries[k].roots.double_root}});
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_validate(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  WeightConfig w;
  try {
    w = validate_config(cfg);
  } catch (const ConfigError& e) {
    json j = {{"valid", false}, {"violations", e.violations}};
    try {
      cfg.manifold.check();
      j["weights"] = weight_json(validate_params(cfg.manifold, cfg.weights));
    } catch (const std::exception&) {
    }
    out << j.dump(2) << '\n';
    return 1;
  }
  out << weight_json(w).dump(2) << '\n';
  return 0;
}

int cmd_solve(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  validate_config(cfg);
  auto g = make_grid(cfg.manifold, cfg.grid);
  Laplacian lap(g);
  const Trajectory t = solve(lap, initial_field(cfg, g), cfg.solve);
  const std::string dir = resolve_output(cfg.output);
  write_trajectory(dir, t);
  json rep = {{"completed", t.completed},
              {"failure", t.failure},
              {"experimental", t.experimental},
              {"frames", t.frames.size()},
              {"steps", t.step_sizes.size()},
              {"rejected", t.rejected},
              {"provenance", provenance(cfg)}};
  write_json((fs::path(dir) / "report.json").string(), rep);
  out << rep.dump(2) << '\n';
  return t.completed ? 0 : 1;
}

int cmd_weak(const Common& c, std::optional<int> levels, const std::vector<double>& schedule, std::ostream& out) {
  ExperimentConfig cfg = load(c);
  if (levels) cfg.weak.levels = *levels;
  if (!schedule.empty()) cfg.weak.schedule = schedule;
  validate_config(cfg);
  auto g = make_grid(cfg.manifold, cfg.grid);
  Laplacian lap(g);
  // nonnegative data vanishing near the second half of the radial interval
  const double L = cfg.manifold.length();
  const Field u0 = Field::sample(g, [L](double x, double, double th) {
    const double z = (x - 0.3 * L) / (0.25 * L);
    return std::max(0.0, 1.0 - z * z) * (1.0 + 0.3 * std::cos(th));
  });
  WeakControls wc = default_weak_controls(cfg.solve.m, cfg.solve.T);
  wc.levels = cfg.weak.levels;
  wc.schedule = cfg.weak.schedule;
  wc.gap_tolerance = cfg.weak.gap_tolerance;
  const WeakRun run = solve_weak(lap, u0, wc);
  VerificationReport r;
  r.suite = "weak";
  r.config_hash = config_hash(cfg);
  r.seed = cfg.seed;
  r.check("all levels completed", run.failed ? 0.0 : 1.0, ">=", 1.0);
  r.check("max(w_{k+1}-w_k)", level_monotonicity(run), "<=", cfg.tolerances.monotonicity);
  const EnergyReport e = energy_check(lap, u0, run, cfg.tolerances.energy_slack);
  r.check("energy violations", static_cast<double>(e.violations.size()), "<=", 0.0);
  const WeakResidual res = weak_residual(lap, run.limit());
  r.details["schedule"] = run.schedule;
  r.details["last_gap"] = run.last_gap;
  r.details["converged"] = run.converged;
  r.details["failure"] = run.failure;
  r.details["energy_initial"] = e.initial;
  r.details["energy_worst_ratio"] = e.worst_ratio;
  r.details["energy_bound"] = e.initial_bound;
  r.details["residual"] = {{"max_scaled", res.max_scaled}, {"max_raw", res.max_raw}, {"worst", res.worst}};
  json levels_json = json::array();
  for (std::size_t k = 0; k < run.levels.size(); ++k)
    levels_json.push_back({{"delta", run.schedule[k]},
                           {"completed", run.levels[k].completed},
                           {"steps", run.levels[k].step_sizes.size()},
                           {"gap", k < run.gaps.size() ? json(run.gaps[k]) : json::array()}});
  r.details["levels"] = levels_json;
  const json j = r.to_json();
  write_json((fs::path(resolve_output(cfg.output)) / "weak_report.json").string(), j);
  out << j.dump(2) << '\n';
  return r.passed() ? 0 : 1;
}

int cmd_compare(const Common& c, int pairs, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  validate_config(cfg);
  auto g = make_grid(cfg.manifold, cfg.grid);
  Laplacian lap(g);
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < pairs; ++k) seeds.push_back(cfg.seed * 1000 + k);
  VerificationReport r = run_comparison_batch(lap, seeds, {cfg.solve.m}, cfg.solve, cfg.tolerances);
  r.config_hash = config_hash(cfg);
  r.seed = cfg.seed;
  const json j = r.to_json();
  write_json((fs::path(resolve_output(cfg.output)) / "comparison_report.json").string(), j);
  out << j.dump(2) << '\n';
  return r.passed() ? 0 : 1;
}

int cmd_diagnose(const Common& c, const std::string& frames_dir, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  validate_config(cfg);
  auto g = make_grid(cfg.manifold, cfg.grid);
  Laplacian lap(g);
  std::ifstream in(fs::path(frames_dir) / "frames.json");
  if (!in) throw UsageError("no frames.json in " + frames_dir);
  const json index = json::parse(in);
  std::vector<Field> frames;
  std::vector<double> times;
  for (const auto& e : index) {
    times.push_back(e.at("t").get<double>());
    frames.push_back(load_field((fs::path(frames_dir) / e.at("file").get<std::string>()).string(), g));
  }
  if (frames.empty()) throw UsageError("trajectory has no frames");
  json j;
  j["frames"] = json::array();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    json f = {{"t", times[k]}};
    for (int s = 0; s <= 2; ++s)
      f["mellin_norm_s" + std::to_string(s)] = mellin_norm(lap, frames[k], {s, cfg.weights.gamma, cfg.weights.p, 0.0});
    json tips = json::array();
    for (int tip = 0; tip < g->manifold.tip_count(); ++tip) {
      const TipExpansion e = tip_decay_rate(frames[k], tip);
      tips.push_back({{"tip", tip},
                      {"constant", e.constant},
                      {"exponent", std::isnan(e.exponent) ? json(nullptr) : json(e.exponent)},
                      {"flat", e.flat},
                      {"diverged", e.diverged}});
    }
    f["tips"] = tips;
    j["frames"].push_back(f);
  }
  if (frames.size() >= 8) {
    const HolderEstimate h = holder_estimate(frames, times);
    j["holder"] = {{"space", h.space},
                   {"time", h.time},
                   {"ratio", h.ratio},
                   {"space_saturated", h.space_saturated},
                   {"time_saturated", h.time_saturated},
                   {"degenerate", h.degenerate}};
  }
  j["provenance"] = provenance(cfg);
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_suite(const Common& c, bool quick, const std::vector<int>& only, std::ostream& out) {
  if (c.config_path.empty()) {
    AcceptanceOptions o;
    o.quick = quick;
    o.only = only;
    if (c.seed) o.seed = *c.seed;
    const auto results = run_acceptance(o, [&](const CriterionResult& r) { out << format_line(r) << std::endl; });
    const json j = acceptance_json(results);
    if (!c.out.empty()) write_json((fs::path(resolve_output(c.out)) / "acceptance.json").string(), j);
    return j["passed"].get<bool>() ? 0 : 1;
  }

  // configured suites on the configured manifold
  const ExperimentConfig cfg = load(c);
  validate_config(cfg);
  auto g = make_grid(cfg.manifold, cfg.grid);
  Laplacian lap(g);
  const Field u0 = initial_field(cfg, g);
  json reports = json::array();
  bool all = true;
  for (const auto& name : cfg.suites) {
    VerificationReport r;
    if (name == "comparison") {
      std::vector<std::uint64_t> seeds;
      for (int k = 0; k < (quick ? 3 : 10); ++k) seeds.push_back(cfg.seed * 1000 + k);
      r = run_comparison_batch(lap, seeds, {cfg.solve.m}, cfg.solve, cfg.tolerances);
    } else if (name == "bounds") {
      r = run_bounds(lap, u0, u0.min(), u0.max(), cfg.solve, cfg.tolerances);
    } else if (name == "smoothing") {
      SmoothingOptions so;
      so.rates = g->angular.mode_count > 3;
      so.norm.gamma = cfg.weights.gamma;
      so.norm.p = cfg.weights.p;
      r = smoothing_report(lap, solve(lap, random_rough_field(g, cfg.seed, 1.0, 2.0), cfg.solve), so);
    } else if (name == "weak") {
      WeakControls wc = default_weak_controls(std::max(1.0, cfg.solve.m), cfg.solve.T);
      wc.levels = cfg.weak.levels;
      wc.schedule = cfg.weak.schedule;
      const Field data = u0.map([&](double v) { return std::max(0.0, v - 1.5); });
      const WeakRun run = solve_weak(lap, data, wc);
      r.suite = "weak";
      r.check("all levels completed", run.failed ? 0.0 : 1.0, ">=", 1.0);
      r.check("max(w_{k+1}-w_k)", level_monotonicity(run), "<=", cfg.tolerances.monotonicity);
      r.check("energy violations", static_cast<double>(energy_check(lap, data, run, cfg.tolerances.energy_slack).violations.size()),
              "<=", 0.0);
    }
    r.config_hash = config_hash(cfg);
    r.seed = cfg.seed;
    out << (r.passed() ? "PASS  " : "FAIL  ") << name << std::endl;
    all = all && r.passed();
    reports.push_back(r.to_json());
  }
  write_json((fs::path(resolve_output(cfg.output)) / "suite_report.json").string(),
             {{"passed", all}, {"reports", reports}, {"provenance", provenance(cfg)}});
  return all ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Porous medium flow on manifolds with conical tips", "conepme"};
  app.require_subcommand(1);

  Common c;
  int count = 6;
  auto* spectrum = app.add_subcommand("spectrum", "cross-section spectrum, indicial roots, weight window");
  add_common(spectrum, c, false);
  spectrum->add_option("--count", count, "number of distinct eigenvalues")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check a config and print the weight report");
  add_common(validate, c, false);

  auto* solve_cmd = app.add_subcommand("solve", "run the flow and write frames");
  add_common(solve_cmd, c, true);

  std::optional<int> levels;
  std::vector<double> schedule;
  auto* weak_cmd = app.add_subcommand("weak", "regularized weak solution for nonnegative data");
  add_common(weak_cmd, c, true);
  weak_cmd->add_option("--levels", levels, "number of regularization levels");
  weak_cmd->add_option("--schedule", schedule, "explicit decreasing delta values")->delimiter(',');

  int pairs = 10;
  auto* compare_cmd = app.add_subcommand("compare", "comparison principle on seeded ordered pairs");
  add_common(compare_cmd, c, true);
  compare_cmd->add_option("--pairs", pairs, "number of pairs")->check(CLI::PositiveNumber);

  std::string frames_dir;
  auto* diagnose = app.add_subcommand("diagnose", "norms, tip decay and Hölder estimates of stored frames");
  add_common(diagnose, c, false);
  diagnose->add_option("--grid", c.grid, "grid size NxK of the stored frames");
  diagnose->add_option("--frames", frames_dir, "directory written by solve")->required();

  bool quick = false;
  std::vector<int> only;
  auto* suite = app.add_subcommand("suite", "acceptance criteria, or the config's suites with --config");
  add_common(suite, c, false);
  suite->add_option("--out", c.out, "directory for the JSON report");
  suite->add_flag("--quick", quick, "reduced seeds and grids");
  suite->add_option("--only", only, "criterion ids")->delimiter(',');

  std::vector<std::string> argv_store{"conepme"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  if (args.empty()) {
    out << app.help();
    return 2;
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*spectrum) return cmd_spectrum(c, count, out);
    if (*validate) return cmd_validate(c, out);
    if (*solve_cmd) return cmd_solve(c, out);
    if (*weak_cmd) return cmd_weak(c, levels, schedule, out);
    if (*compare_cmd) return cmd_compare(c, pairs, out);
    if (*diagnose) return cmd_diagnose(c, frames_dir, out);
    if (*suite) return cmd_suite(c, quick, only, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    for (const auto& v : e.violations) err << "  - " << v << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace conepme::harness
