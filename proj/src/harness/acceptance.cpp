#include "conepme/harness/acceptance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "conepme/harness/initial_data.hpp"
#include "conepme/harness/suites.hpp"
#include "conepme/norms.hpp"
#include "conepme/weak.hpp"

namespace conepme::harness {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

void absorb(VerificationReport& into, const VerificationReport& from, const std::string& prefix) {
  for (const auto& p : from.preconditions_failed) into.preconditions_failed.push_back(prefix + p);
  for (auto a : from.assertions) {
    a.name = prefix + a.name;
    into.assertions.push_back(a);
  }
}

double measured(const VerificationReport& r, const std::string& name) {
  for (const auto& a : r.assertions)
    if (a.name == name) return a.measured;
  return std::nan("");
}

// worst measured value of assertions whose name ends with `suffix`
double worst(const VerificationReport& r, const std::string& suffix, bool largest) {
  double w = largest ? -INFINITY : INFINITY;
  for (const auto& a : r.assertions)
    if (a.name.size() >= suffix.size() && a.name.compare(a.name.size() - suffix.size(), suffix.size(), suffix) == 0)
      w = largest ? std::max(w, a.measured) : std::min(w, a.measured);
  return w;
}

std::shared_ptr<const Grid> suspension(double c, int N, int K, double x_min = 1e-5) {
  return make_grid(ConeManifold::suspension(CrossSection::circle(c)), {N, K, x_min, 2.0});
}

std::shared_ptr<const Grid> capped(const CrossSection& cs, int N, int K, double x_min = 1e-5) {
  return make_grid(ConeManifold::capped(cs, 1.0), {N, K, x_min, 2.0});
}

// 1. closed-form spectral invariants
CriterionResult spectral(const AcceptanceOptions&) {
  CriterionResult out{1, "spectral invariants", {}, {}, 0.0};
  auto& r = out.report;
  struct Case {
    std::string name;
    CrossSection cs;
    double eps, lo, hi;
    bool check_eps;
  };
  const std::vector<Case> cases{{"circle c=1", CrossSection::circle(1.0), 1.0, -1.0, 0.0, true},
                                {"sphere S^2", CrossSection::sphere(2), 1.0, -0.5, 0.5, true},
                                {"circle c=0.4", CrossSection::circle(0.4), 2.5, -1.0, 1.0, false}};
  for (const auto& c : cases) {
    const int n = c.cs.dimension();
    const double l1 = cross_section_eigenvalue(c.cs, 1);
    const WeightWindow w = weight_window(n, l1);
    if (c.check_eps) r.check(c.name + " |eps_bar-" + fmt(c.eps) + "|", std::abs(epsilon_bar(n, l1) - c.eps), "<=", 1e-12);
    r.check(c.name + " |gamma_min-(" + fmt(c.lo) + ")|", std::abs(w.lower - c.lo), "<=", 1e-12);
    r.check(c.name + " |gamma_max-(" + fmt(c.hi) + ")|", std::abs(w.upper - c.hi), "<=", 1e-12);
  }
  out.summary = "windows (-1,0), (-0.5,0.5), (-1,1)";
  return out;
}

// max over the collar of |x^2 L_1 x^q| / max |x^q| on a straight capped cone
double indicial_residual(const CrossSection& cs, int N, int K) {
  auto g = capped(cs, N, K);
  Laplacian lap(g);
  const auto& op = lap.modes()[1];
  const IndicialPair roots = indicial_roots(g->n(), op.lambda);
  // model solution with positive exponent: x^{q^+} when n = 1, x^{-q^-} in general
  const double q = g->n() == 1 ? roots.plus : -roots.minus;
  std::vector<double> u(N), lu(N);
  for (int i = 0; i < N; ++i) u[i] = std::pow(g->radial.x[i], q);
  op.apply(u, lu);
  double res = 0.0, norm = 0.0;
  for (int i = 0; i < N && g->radial.x[i] <= g->manifold.collar_length; ++i) {
    res = std::max(res, std::abs(g->radial.x[i] * g->radial.x[i] * lu[i]));
    norm = std::max(norm, std::abs(u[i]));
  }
  return res / norm;
}

// 2. indicial annihilation at second order
CriterionResult indicial(const AcceptanceOptions&) {
  CriterionResult out{2, "indicial annihilation", {}, {}, 0.0};
  auto& r = out.report;
  std::string summary;
  for (const auto& [name, cs, K] : {std::tuple{std::string("circle c=0.8"), CrossSection::circle(0.8), 16},
                                    std::tuple{std::string("sphere S^2"), CrossSection::sphere(2), 6}}) {
    const double e128 = indicial_residual(cs, 128, K);
    const double e256 = indicial_residual(cs, 256, K);
    const double e512 = indicial_residual(cs, 512, K);
    const double o1 = std::log2(e128 / e256), o2 = std::log2(e256 / e512);
    r.check(name + " order 128->256", o1, ">=", 1.9);
    r.check(name + " order 256->512", o2, ">=", 1.9);
    summary += name + " orders " + fmt(o1) + ", " + fmt(o2) + "; ";
  }
  out.summary = summary.substr(0, summary.size() - 2);
  return out;
}

// 3. mass, bounds and stationary constants on the suspension
CriterionResult conservation(const AcceptanceOptions& o) {
  CriterionResult out{3, "conservation and bounds", {}, {}, 0.0};
  auto g = suspension(0.8, 128, 32);
  Laplacian lap(g);
  Tolerances tol;
  const std::vector<double> ms{1.0, 2.0, 3.0};
  std::vector<std::future<VerificationReport>> runs;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    runs.push_back(std::async(std::launch::async, [&, k] {
      SolveControls c;
      c.m = ms[k];
      c.T = 1.0;
      const Field u0 = random_smooth_field(g, o.seed + k, 1.0, 2.0);
      return run_bounds(lap, u0, 1.0, 2.0, c, tol);
    }));
    runs.push_back(std::async(std::launch::async, [&, k] {
      SolveControls c;
      c.m = ms[k];
      c.T = 1.0;
      return run_constants(lap, 1.5, c, 1e-12);
    }));
  }
  for (std::size_t k = 0; k < runs.size(); ++k)
    absorb(out.report, runs[k].get(), "m=" + fmt(ms[k / 2]) + " ");
  out.summary = "mass drift " + fmt(worst(out.report, "relative mass drift", true)) + ", bound excess " +
                fmt(std::max({0.0, -worst(out.report, "min(u)-c0", false), worst(out.report, "max(u)-c1", true)})) +
                ", constants " + fmt(worst(out.report, "max|u(t)-c|", true));
  return out;
}

// 4. comparison principle over seeded ordered pairs
CriterionResult comparison(const AcceptanceOptions& o) {
  CriterionResult out{4, "comparison principle", {}, {}, 0.0};
  auto g = suspension(0.8, 64, 16);
  Laplacian lap(g);
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < (o.quick ? 5 : 20); ++k) seeds.push_back(o.seed * 1000 + k);
  SolveControls c;
  c.T = 0.5;
  c.frame_interval = 0.05;
  out.report = run_comparison_batch(lap, seeds, {2.0, 3.0}, c, Tolerances{});
  out.summary = std::to_string(seeds.size() * 2) + " pairs, min(u2-u1) " +
                fmt(out.report.details["worst_gap"].get<double>());
  return out;
}

// one implicit Euler heat step, mode by mode with dense matrices
Field dense_heat_step(const Laplacian& lap, const Field& u, double dt) {
  const Grid& g = lap.grid();
  const int N = g.N(), K = g.K();
  Eigen::MatrixXd basis(K, K);
  for (int b = 0; b < K; ++b)
    for (int k = 0; k < K; ++k) basis(b, k) = g.angular.value(b, k);
  Eigen::MatrixXd vals(N, K);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) vals(i, k) = u(i, k);
  Eigen::MatrixXd coeffs = basis.transpose().fullPivLu().solve(vals.transpose()).transpose();
  for (int b = 0; b < K; ++b) {
    const auto& op = lap.mode_for_basis(b);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N);
    for (int i = 0; i < N; ++i) {
      A(i, i) -= dt * (op.reaction[i] - op.lower[i] - op.upper[i]);
      if (i > 0) A(i, i - 1) -= dt * op.lower[i];
      if (i + 1 < N) A(i, i + 1) -= dt * op.upper[i];
    }
    coeffs.col(b) = A.fullPivLu().solve(Eigen::VectorXd(coeffs.col(b)));
  }
  const Eigen::MatrixXd v = coeffs * basis;
  Field f(lap.grid_ptr());
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) f(i, k) = v(i, k);
  return f;
}

// 5. heat equation against the per-mode formula and the explicit oracle
CriterionResult heat(const AcceptanceOptions& o) {
  CriterionResult out{5, "heat-equation oracle", {}, {}, 0.0};
  auto& r = out.report;
  {
    auto g = suspension(0.8, 64, 16);
    Laplacian lap(g);
    const Field u = random_smooth_field(g, o.seed, 1.0, 2.0);
    SolveControls c;
    c.m = 1.0;
    double worst_step = 0.0;
    for (double dt : {1e-4, 1e-2, 0.5}) {
      const Field a = step(lap, u, dt, c);
      const Field b = dense_heat_step(lap, u, dt);
      worst_step = std::max(worst_step, max_abs_difference(a, b) / b.max_abs());
    }
    r.check("per-step |implicit-modal|/|u|", worst_step, "<=", 1e-12);
  }
  {
    // the explicit bound scales like x_min^2; a coarser tip keeps the oracle affordable
    auto g = suspension(0.8, 64, 16, 0.02);
    Laplacian lap(g);
    const Field u0 = random_smooth_field(g, o.seed + 1, 1.0, 2.0, 2);
    SolveControls c;
    c.m = 1.0;
    c.T = 0.01;
    c.frame_interval = 0.01;
    c.dt_max = 0.0025;
    c.tolerance = 1e-7;
    const Trajectory imp = solve(lap, u0, c);
    const Trajectory ref = explicit_reference(lap, u0, c, 0.5 * explicit_stability_bound(lap, u0, 1.0));
    r.check("implicit completed", imp.completed && ref.completed ? 1.0 : 0.0, ">=", 1.0);
    r.check("T=0.01 |implicit-explicit|_inf", max_abs_difference(imp.frames.back().u, ref.frames.back().u), "<", 1e-3);
  }
  out.summary = "per step " + fmt(r.assertions[0].measured) + ", vs explicit " + fmt(r.assertions[2].measured);
  return out;
}

// 6. remainder exponent at the tips after the flow
CriterionResult tips(const AcceptanceOptions& o) {
  CriterionResult out{6, "tip asymptotics", {}, {}, 0.0};
  auto g = suspension(0.8, 128, 32);
  Laplacian lap(g);
  const Field u0 = random_smooth_field(g, o.seed + 17, 1.0, 2.0);
  SolveControls c;
  c.m = 2.0;
  c.T = 1.0;
  const Trajectory t = solve(lap, u0, c);
  auto& r = out.report;
  r.check("completed", t.completed ? 1.0 : 0.0, ">=", 1.0);
  std::string summary = "alpha";
  for (int tip = 0; tip < 2; ++tip) {
    const TipExpansion e = tip_decay_rate(t.frames.back().u, tip);
    r.check("tip " + std::to_string(tip) + " alpha", e.exponent, ">=", 1.15);
    summary += " " + fmt(e.exponent);
  }
  out.summary = summary + " (q_1^+ = 1.25)";
  return out;
}

// 7. modal rate ordering and norm-ratio drop
CriterionResult smoothing(const AcceptanceOptions& o) {
  CriterionResult out{7, "smoothing", {}, {}, 0.0};
  {
    auto g = capped(CrossSection::circle(0.8), 96, 16);
    Laplacian lap(g);
    Field u0(g, 1.5);
    // first basis function of each of the modes j = 1, 2, 3
    for (int j = 1; j <= 3; ++j) {
      int b = 0;
      while (g->angular.mode_of[b] != j) ++b;
      u0 += single_mode_field(g, b, 0.0, 0.1);
    }
    SolveControls c;
    c.m = 1.0;
    c.T = 0.2;
    c.frame_interval = 0.01;
    c.tolerance = 1e-7;
    SmoothingOptions so;
    so.norms = false;
    absorb(out.report, smoothing_report(lap, solve(lap, u0, c), so), "heat ");
  }
  {
    auto g = suspension(0.8, 128, 32);
    Laplacian lap(g);
    const Field u0 = random_rough_field(g, o.seed + 29, 1.0, 2.0);
    SolveControls c;
    c.m = 2.0;
    c.T = 0.1;
    c.dt_init = 1e-6;
    c.output_times = {0.001};
    c.frame_interval = 0.025;
    SmoothingOptions so;
    so.rates = false;
    so.t_early = 0.001;
    so.t_late = 0.1;
    absorb(out.report, smoothing_report(lap, solve(lap, u0, c), so), "rough ");
  }
  const auto& d = out.report;
  out.summary = "rate gaps " + fmt(measured(d, "heat r_2-r_1")) + ", " + fmt(measured(d, "heat r_3-r_2")) +
                "; norm ratio late/early " + fmt(measured(d, "rough ratio(late)/ratio(early)"));
  return out;
}

// 8. weak solutions from Barenblatt data on the flat cone
CriterionResult weak(const AcceptanceOptions& o) {
  CriterionResult out{8, "weak solutions", {}, {}, 0.0};
  auto& r = out.report;
  auto g = capped(CrossSection::circle(1.0), 128, 16);
  Laplacian lap(g);
  // peak 1 and support radius 0.3 at t0
  const double t0 = 0.005625;
  const Barenblatt b = Barenblatt::with_peak(2.0, 2, t0, 1.0);
  const Field u0 = barenblatt_field(g, b, t0);
  const double T = 0.3;
  WeakControls c = default_weak_controls(2.0, T);
  c.solve.dt_max = T / (o.quick ? 1000.0 : 2000.0);
  c.solve.dt_init = c.solve.dt_max / 100.0;
  c.solve.dt_min = c.solve.dt_init * 1e-6;
  c.solve.frame_interval = T / 60.0;
  for (int k = 1; k <= 6; ++k) c.schedule.push_back(0.064 * std::ldexp(1.0, -k));
  const WeakRun run = solve_weak(lap, u0, c);
  r.check("all levels completed", run.failed ? 0.0 : 1.0, ">=", 1.0);
  r.check("max(w_{k+1}-w_k)", level_monotonicity(run), "<=", 1e-10);
  const EnergyReport e = energy_check(lap, u0, run, 1e-6);
  r.check("energy violations", static_cast<double>(e.violations.size()), "<=", 0.0);
  const WeakResidual res = weak_residual(lap, run.limit());
  r.check("scaled weak residual", res.max_scaled, "<", 5e-3);
  std::vector<double> ts, rs;
  for (const auto& f : run.limit().frames) {
    if (f.t <= 0.0) continue;
    ts.push_back(t0 + f.t);
    rs.push_back(support_radius(f.u, run.schedule.back()));
  }
  const double beta = growth_exponent(ts, rs);
  r.check("|growth exponent-0.25|", std::abs(beta - 0.25), "<=", 0.05);
  r.details["growth_exponent"] = beta;
  r.details["last_gap"] = run.last_gap;
  r.details["worst_test_function"] = res.worst;
  out.summary = "residual " + fmt(res.max_scaled) + ", growth " + fmt(beta) + ", monotonicity " +
                fmt(level_monotonicity(run)) + ", last gap " + fmt(run.last_gap);
  return out;
}

// 9. long run to T = 50
CriterionResult long_time(const AcceptanceOptions& o) {
  CriterionResult out{9, "long-time existence", {}, {}, 0.0};
  auto g = o.quick ? suspension(0.8, 64, 16) : suspension(0.8, 128, 32);
  Laplacian lap(g);
  const Field u0 = random_smooth_field(g, o.seed + 41, 1.0, 2.0);
  SolveControls c;
  c.m = 2.0;
  c.T = 50.0;
  c.dt_max = 1.0;
  c.frame_interval = 1.0;
  out.report = run_long_time(lap, u0, c, 1e-3);
  out.summary = "steps " + out.report.details["steps"].dump() + ", distance to equilibrium " +
                fmt(measured(out.report, "|u(T)-mass/volume|"));
  return out;
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> list{
      {1, "spectral invariants", spectral}, {2, "indicial annihilation", indicial},
      {3, "conservation and bounds", conservation}, {4, "comparison principle", comparison},
      {5, "heat-equation oracle", heat},     {6, "tip asymptotics", tips},
      {7, "smoothing", smoothing},           {8, "weak solutions", weak},
      {9, "long-time existence", long_time}};
  return list;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o,
                                            const std::function<void(const CriterionResult&)>& on_done) {
  std::vector<CriterionResult> results;
  for (const auto& c : acceptance_criteria()) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), c.id) == o.only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = c.run(o);
    } catch (const std::exception& e) {
      res = CriterionResult{c.id, c.name, {}, std::string("error: ") + e.what(), 0.0};
      res.report.preconditions_failed.push_back(e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.report.suite = "criterion " + std::to_string(c.id);
    res.report.seed = o.seed;
    res.report.runtime_seconds = res.seconds;
    if (on_done) on_done(res);
    results.push_back(std::move(res));
  }
  return results;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed() ? "PASS" : "FAIL") << "  " << r.id << "  " << std::left << std::setw(26) << r.name << r.summary
     << "  [" << std::fixed << std::setprecision(1) << r.seconds << " s]";
  if (!r.passed()) {
    for (const auto& p : r.report.preconditions_failed) os << "\n      precondition: " << p;
    for (const auto& a : r.report.assertions)
      if (!a.passed) os << "\n      " << a.name << " = " << a.measured << " (need " << a.relation << " " << a.threshold << ")";
  }
  return os.str();
}

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j;
  j["criteria"] = nlohmann::json::array();
  j["timing"] = nlohmann::json::object();
  bool all = true;
  for (const auto& r : results) {
    nlohmann::json c = r.report.to_json();
    c["id"] = r.id;
    c["name"] = r.name;
    c["summary"] = r.summary;
    j["criteria"].push_back(c);
    j["timing"][std::to_string(r.id)] = r.seconds;
    all = all && r.passed();
  }
  j["passed"] = all;
  return j;
}

}  // namespace conepme::harness
