#include "conepme/harness/suites.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "conepme/harness/initial_data.hpp"

namespace conepme::harness {

namespace {

double inf() { return std::numeric_limits<double>::infinity(); }

std::string tag(const std::string& base, std::uint64_t seed, double m) {
  std::ostringstream os;
  os << base << "[seed=" << seed << ",m=" << m << "]";
  return os.str();
}

// min over frames of (b - a); +inf if there are no common frames
double min_gap(const Trajectory& a, const Trajectory& b) {
  double g = inf();
  for (std::size_t f = 0; f < std::min(a.frames.size(), b.frames.size()); ++f) {
    const auto& x = a.frames[f].u.values();
    const auto& y = b.frames[f].u.values();
    for (std::size_t j = 0; j < x.size(); ++j) g = std::min(g, y[j] - x[j]);
  }
  return g;
}

double min_over_frames(const Trajectory& t) {
  double v = inf();
  for (const auto& f : t.frames) v = std::min(v, f.u.min());
  return v;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sx += x[j];
    sy += y[j];
    sxx += x[j] * x[j];
    sxy += x[j] * y[j];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const Frame& frame_near(const Trajectory& t, double time) {
  return *std::min_element(t.frames.begin(), t.frames.end(),
                           [&](const Frame& a, const Frame& b) { return std::abs(a.t - time) < std::abs(b.t - time); });
}

}  // namespace

VerificationReport run_comparison(const Laplacian& lap, const Field& u01, const Field& u02, const SolveControls& c,
                                  const Tolerances& tol) {
  VerificationReport r;
  r.suite = "comparison";
  if (u01.min() <= 0.0 || u02.min() <= 0.0) r.preconditions_failed.push_back("data must be strictly positive");
  const Field diff = u02 - u01;
  if (diff.min() < 0.0) r.preconditions_failed.push_back("data are not ordered");
  if (!r.preconditions_failed.empty()) return r;

  auto j1 = std::async(std::launch::async, [&] { return solve(lap, u01, c); });
  const Trajectory t2 = solve(lap, u02, c);
  const Trajectory t1 = j1.get();
  const double c0 = u01.min();
  r.check("completed", (t1.completed && t2.completed) ? 1.0 : 0.0, ">=", 1.0);
  r.check("min(u2-u1)", min_gap(t1, t2), ">=", -tol.ordering);
  r.check("min(u1)-c0", min_over_frames(t1) - c0, ">=", -tol.bounds);
  r.details["m"] = c.m;
  r.details["frames"] = t1.frames.size();
  return r;
}

VerificationReport run_comparison_batch(const Laplacian& lap, const std::vector<std::uint64_t>& seeds,
                                        const std::vector<double>& ms, const SolveControls& c, const Tolerances& tol) {
  struct Job {
    std::uint64_t seed;
    double m;
  };
  std::vector<Job> jobs;
  for (double m : ms)
    for (auto s : seeds) jobs.push_back({s, m});

  std::vector<std::future<VerificationReport>> runs;
  for (const auto& job : jobs)
    runs.push_back(std::async(std::launch::async, [&lap, &c, &tol, job] {
      const Field u1 = random_smooth_field(lap.grid_ptr(), job.seed, 1.0, 2.0);
      const Field u2 = u1 + random_smooth_field(lap.grid_ptr(), job.seed + 7919, 0.0, 0.2);
      SolveControls cc = c;
      cc.m = job.m;
      return run_comparison(lap, u1, u2, cc, tol);
    }));

  VerificationReport r;
  r.suite = "comparison";
  double worst = inf();
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const VerificationReport sub = runs[k].get();
    for (const auto& p : sub.preconditions_failed) r.preconditions_failed.push_back(tag(p, jobs[k].seed, jobs[k].m));
    for (auto a : sub.assertions) {
      if (a.name == "min(u2-u1)") worst = std::min(worst, a.measured);
      a.name = tag(a.name, jobs[k].seed, jobs[k].m);
      r.assertions.push_back(a);
    }
  }
  r.details["pairs"] = jobs.size();
  r.details["worst_gap"] = worst;
  return r;
}

VerificationReport run_bounds(const Laplacian& lap, const Field& u0, double c0, double c1, const SolveControls& c,
                              const Tolerances& tol) {
  VerificationReport r;
  r.suite = "bounds";
  if (!(c0 > 0.0)) r.preconditions_failed.push_back("c0 must be positive");
  if (u0.min() < c0 || u0.max() > c1) r.preconditions_failed.push_back("data outside [c0, c1]");
  if (!r.preconditions_failed.empty()) return r;

  const Trajectory t = solve(lap, u0, c);
  r.check("completed", t.completed ? 1.0 : 0.0, ">=", 1.0);
  const double m0 = mass(lap, u0);
  double lo = inf(), hi = -inf(), drift = 0.0, hull_up = 0.0, hull_down = 0.0, consistency = 0.0;
  for (std::size_t f = 0; f < t.frames.size(); ++f) {
    const Frame& fr = t.frames[f];
    lo = std::min(lo, fr.u.min());
    hi = std::max(hi, fr.u.max());
    drift = std::max(drift, std::abs(fr.diag.mass - m0) / m0);
    if (f > 0) {
      hull_up = std::max(hull_up, fr.u.max() - t.frames[f - 1].u.max());
      hull_down = std::max(hull_down, t.frames[f - 1].u.min() - fr.u.min());
    }
    const Field um = fr.u.map([&](double v) { return std::pow(v, c.m); });
    consistency = std::max(consistency, max_abs_difference(um, fr.w) / fr.w.max_abs());
  }
  r.check("min(u)-c0", lo - c0, ">=", -tol.bounds);
  r.check("max(u)-c1", hi - c1, "<=", tol.bounds);
  r.check("max(u) increase between frames", hull_up, "<=", tol.bounds);
  r.check("min(u) decrease between frames", hull_down, "<=", tol.bounds);
  r.check("relative mass drift", drift, "<", tol.mass);
  r.check("|u^m-w|/|w|", consistency, "<=", 1e-12);
  r.details["m"] = c.m;
  r.details["steps"] = t.step_sizes.size();
  r.details["rejected"] = t.rejected;
  return r;
}

VerificationReport run_constants(const Laplacian& lap, double value, const SolveControls& c, double tolerance) {
  VerificationReport r;
  r.suite = "constants";
  const Field u0(lap.grid_ptr(), value);
  const Trajectory t = solve(lap, u0, c);
  double dev = 0.0;
  for (const auto& f : t.frames) dev = std::max(dev, max_abs_difference(f.u, u0));
  r.check("completed", t.completed ? 1.0 : 0.0, ">=", 1.0);
  r.check("max|u(t)-c|", dev, "<=", tolerance);
  r.details["m"] = c.m;
  return r;
}

VerificationReport run_long_time(const Laplacian& lap, const Field& u0, const SolveControls& c, double tolerance) {
  VerificationReport r;
  r.suite = "long_time";
  const Trajectory t = solve(lap, u0, c);
  const double target = mass(lap, u0) / lap.integral(Field(lap.grid_ptr(), 1.0));
  r.check("completed", t.completed ? 1.0 : 0.0, ">=", 1.0);
  r.check("reached T", t.frames.empty() ? 0.0 : t.frames.back().t, ">=", c.T);
  const double dist = t.frames.empty() ? inf() : max_abs_difference(t.frames.back().u, Field(lap.grid_ptr(), target));
  r.check("|u(T)-mass/volume|", dist, "<", tolerance);
  r.details["equilibrium"] = target;
  r.details["steps"] = t.step_sizes.size();
  r.details["rejected"] = t.rejected;
  if (!t.completed) r.details["failure"] = t.failure;
  return r;
}

VerificationReport smoothing_report(const Laplacian& lap, const Trajectory& traj, const SmoothingOptions& o) {
  VerificationReport r;
  r.suite = "smoothing";
  if (traj.frames.size() < 4) {
    r.preconditions_failed.push_back("need at least 4 frames");
    return r;
  }
  const auto& mode_count = lap.grid().angular.mode_count;

  if (o.rates) {
    if (o.modes >= mode_count) {
      r.preconditions_failed.push_back("grid resolves fewer modes than requested");
      return r;
    }
    std::vector<double> rates;
    const std::size_t first = traj.frames.size() / 2;
    for (int j = 1; j <= o.modes; ++j) {
      std::vector<double> t, e;
      bool monotone = true;
      for (std::size_t f = first; f < traj.frames.size(); ++f) {
        const double v = traj.frames[f].diag.modal_energy[j];
        if (!(v > 0.0)) continue;
        if (!e.empty() && std::log(v) > e.back()) monotone = false;
        t.push_back(traj.frames[f].t);
        e.push_back(std::log(v));
      }
      if (t.size() < 2) {
        r.preconditions_failed.push_back("mode " + std::to_string(j) + " carries no energy");
        return r;
      }
      rates.push_back(-slope(t, e));
      r.check("E_" + std::to_string(j) + " decreasing after transient", monotone ? 1.0 : 0.0, ">=", 1.0);
    }
    for (std::size_t j = 0; j + 1 < rates.size(); ++j)
      r.check("r_" + std::to_string(j + 2) + "-r_" + std::to_string(j + 1), rates[j + 1] - rates[j], ">", 0.0);
    r.details["rates"] = rates;
  }

  if (o.norms) {
    const double T = traj.frames.back().t;
    const Frame& early = frame_near(traj, o.t_early >= 0.0 ? o.t_early : traj.frames[1].t);
    const Frame& late = frame_near(traj, o.t_late >= 0.0 ? o.t_late : 0.5 * T);
    auto ratio = [&](const Field& u) {
      NormSpec hi = o.norm, lo = o.norm;
      hi.s = 2;
      lo.s = 0;
      return mellin_norm(lap, u, hi) / mellin_norm(lap, u, lo);
    };
    const double re = ratio(early.u);
    const double rl = ratio(late.u);
    r.check("s2/s0 ratio finite", std::isfinite(rl) && std::isfinite(re) ? 1.0 : 0.0, ">=", 1.0);
    r.check("ratio(late)/ratio(early)", rl / re, "<", 1.0);
    r.details["t_early"] = early.t;
    r.details["t_late"] = late.t;
    r.details["ratio_early"] = re;
    r.details["ratio_late"] = rl;
  }
  return r;
}

}  // namespace conepme::harness
