#include "conepme/weak.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "conepme/norms.hpp"

namespace conepme {

WeakControls default_weak_controls(double m, double T) {
  WeakControls c;
  c.solve.m = m;
  c.solve.T = T;
  c.solve.adaptive = false;
  c.solve.newton = true;
  c.solve.dt_max = T / 400.0;
  c.solve.dt_init = c.solve.dt_max / 100.0;
  c.solve.dt_min = c.solve.dt_init * 1e-6;
  c.solve.max_sweeps = 60;
  c.solve.frame_interval = T / 50.0;
  return c;
}

std::vector<double> default_schedule(const Field& u0, int levels) {
  if (levels < 1) throw std::invalid_argument("default_schedule: need at least one level");
  const double top = std::max(1.0, u0.max());
  std::vector<double> s;
  for (int k = 1; k <= levels; ++k) s.push_back(std::ldexp(top, -k));
  return s;
}

WeakRun solve_weak(const Laplacian& lap, const Field& u0, const WeakControls& c) {
  if (c.solve.m < 1.0) throw std::invalid_argument("solve_weak: m must be at least 1");
  if (u0.min() < 0.0) throw std::invalid_argument("solve_weak: initial data must be nonnegative");
  c.solve.check();
  WeakRun run;
  run.schedule = c.schedule.empty() ? default_schedule(u0, c.levels) : c.schedule;
  for (std::size_t k = 0; k < run.schedule.size(); ++k) {
    if (!(run.schedule[k] > 0.0) || (k > 0 && !(run.schedule[k] < run.schedule[k - 1])))
      throw std::invalid_argument("solve_weak: schedule must be positive and strictly decreasing");
  }

  const std::size_t L = run.schedule.size();
  auto level = [&](std::size_t k) {
    const double d = run.schedule[k];
    return solve(lap, u0.map([d](double v) { return v + d; }), c.solve);
  };
  run.levels.resize(L);
  if (c.parallel) {
    std::vector<std::future<Trajectory>> jobs;
    for (std::size_t k = 0; k < L; ++k) jobs.push_back(std::async(std::launch::async, level, k));
    for (std::size_t k = 0; k < L; ++k) run.levels[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < L; ++k) run.levels[k] = level(k);
  }

  for (std::size_t k = 0; k < L; ++k) {
    if (!run.levels[k].completed && !run.failed) {
      run.failed = true;
      run.failed_level = static_cast<int>(k);
      std::ostringstream os;
      os << "level " << k << " (delta = " << run.schedule[k] << "): " << run.levels[k].failure;
      run.failure = os.str();
    }
    std::vector<double> e;
    for (const auto& f : run.levels[k].frames) e.push_back(f.diag.gradient_energy);
    run.energy.push_back(std::move(e));
  }
  for (std::size_t k = 0; k + 1 < L; ++k) {
    const auto& a = run.levels[k].frames;
    const auto& b = run.levels[k + 1].frames;
    std::vector<double> gap;
    for (std::size_t f = 0; f < std::min(a.size(), b.size()); ++f) gap.push_back(max_abs_difference(a[f].w, b[f].w));
    run.gaps.push_back(std::move(gap));
  }
  if (!run.gaps.empty() && !run.gaps.back().empty())
    run.last_gap = *std::max_element(run.gaps.back().begin(), run.gaps.back().end());
  run.converged = !run.failed && run.last_gap < c.gap_tolerance;
  return run;
}

double level_monotonicity(const WeakRun& run) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < run.levels.size(); ++k) {
    const auto& a = run.levels[k].frames;
    const auto& b = run.levels[k + 1].frames;
    for (std::size_t f = 0; f < std::min(a.size(), b.size()); ++f)
      for (std::size_t j = 0; j < a[f].w.values().size(); ++j)
        worst = std::max(worst, b[f].w.values()[j] - a[f].w.values()[j]);
  }
  return worst;
}

std::vector<TimeProfile> builtin_time_profiles(double T) {
  std::vector<TimeProfile> p;
  p.push_back({"linear", [T](double t) { return 1.0 - t / T; },
               [T](double a, double b) { return (b - a) - (b * b - a * a) / (2.0 * T); }});
  p.push_back({"quadratic", [T](double t) { return (1.0 - t / T) * (1.0 - t / T); },
               [T](double a, double b) {
                 return T / 3.0 * (std::pow(1.0 - a / T, 3) - std::pow(1.0 - b / T, 3));
               }});
  const double w = std::numbers::pi / (2.0 * T);
  p.push_back({"cosine", [w](double t) { return std::cos(w * t); },
               [w](double a, double b) { return (std::sin(w * b) - std::sin(w * a)) / w; }});
  return p;
}

namespace {

double residual_from_series(const std::vector<double>& t, const std::vector<double>& V, const std::vector<double>& G,
                            const TimeProfile& tau, double* scale) {
  double gterm = 0.0, vterm = 0.0;
  for (std::size_t f = 0; f + 1 < t.size(); ++f) {
    const double a = t[f], b = t[f + 1], d = b - a;
    const double ta = tau.value(a), tb = tau.value(b), tm = tau.value(0.5 * (a + b));
    gterm += d / 6.0 * (ta * G[f] + 2.0 * tm * (G[f] + G[f + 1]) + tb * G[f + 1]);
    // V linear on [a, b]: int tau' V = [tau V] - (V_b - V_a)/d int tau
    vterm += tb * V[f + 1] - ta * V[f] - (V[f + 1] - V[f]) / d * tau.primitive(a, b);
  }
  const double init = tau.value(t.front()) * V.front();
  if (scale) *scale = std::abs(gterm) + std::abs(vterm) + std::abs(init);
  return gterm - vterm - init;
}

void check_profile(const TimeProfile& tau, double T) {
  if (std::abs(tau.value(T)) > 1e-14) throw std::invalid_argument("weak_residual: test function must vanish at T");
}

}  // namespace

double weak_residual_single(const Laplacian& lap, const Trajectory& traj, const Field& spatial, const TimeProfile& tau,
                            double* scale) {
  if (traj.frames.size() < 2) throw std::invalid_argument("weak_residual: need at least two frames");
  check_profile(tau, traj.frames.back().t);
  std::vector<double> t, V, G;
  for (const auto& f : traj.frames) {
    t.push_back(f.t);
    V.push_back(lap.inner(spatial, f.u));
    G.push_back(lap.gradient_inner(spatial, f.w));
  }
  return residual_from_series(t, V, G, tau, scale);
}

std::vector<std::pair<std::string, Field>> builtin_spatial_tests(const Laplacian& lap) {
  const Grid& g = lap.grid();
  const double L = g.manifold.length();
  auto bump = [](double x, double c, double w) {
    const double z = (x - c) / w;
    return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
  };
  struct Radial {
    std::string name;
    std::function<double(double)> f;
  };
  const std::vector<Radial> radial{
      {"tip", [L](double x) { return collar_cutoff(x, 0.5 * L); }},
      {"mid", [&, L](double x) { return bump(x, 0.4 * L, 0.2 * L); }},
      {"outer", [&, L](double x) { return bump(x, 0.7 * L, 0.25 * L); }},
  };
  double phimax = 0.0;
  for (double p : g.phi) phimax = std::max(phimax, p);
  std::vector<std::pair<std::string, Field>> out;
  for (const auto& r : radial)
    for (int b = 0; b < std::min(3, g.K()); ++b) {
      const double q = b == 0 ? 0.0 : decay_exponent(g.n(), lap.mode_for_basis(b).lambda);
      Field f(lap.grid_ptr());
      for (int i = 0; i < g.N(); ++i) {
        const double rad = r.f(g.radial.x[i]) * std::pow(g.phi[i] / phimax, q);
        for (int k = 0; k < g.K(); ++k) f(i, k) = rad * g.angular.value(b, k);
      }
      f.refresh_tip_values();
      out.emplace_back(r.name + "/a" + std::to_string(b), std::move(f));
    }
  return out;
}

WeakResidual weak_residual(const Laplacian& lap, const Trajectory& traj) {
  if (traj.frames.size() < 2) throw std::invalid_argument("weak_residual: need at least two frames");
  const double T = traj.frames.back().t;
  const auto taus = builtin_time_profiles(T);
  WeakResidual out;
  std::vector<double> t, raw, scales;
  for (const auto& f : traj.frames) t.push_back(f.t);
  for (const auto& [name, A] : builtin_spatial_tests(lap)) {
    std::vector<double> V, G;
    for (const auto& f : traj.frames) {
      V.push_back(lap.inner(A, f.u));
      G.push_back(lap.gradient_inner(A, f.w));
    }
    for (const auto& tau : taus) {
      check_profile(tau, T);
      double scale = 0.0;
      const double r = residual_from_series(t, V, G, tau, &scale);
      out.names.push_back(name + "/" + tau.name);
      raw.push_back(r);
      scales.push_back(scale);
    }
  }
  // test functions orthogonal to the solution carry no information; their
  // scale is floored by the largest one in the family
  const double top = scales.empty() ? 0.0 : *std::max_element(scales.begin(), scales.end());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double s = std::max(scales[j], 1e-6 * top);
    const double v = s > 0.0 ? std::abs(raw[j]) / s : 0.0;
    out.scaled.push_back(v);
    out.max_raw = std::max(out.max_raw, std::abs(raw[j]));
    if (v >= out.max_scaled) {
      out.max_scaled = v;
      out.worst = out.names[j];
    }
  }
  return out;
}

EnergyReport energy_check(const Laplacian& lap, const Field& u0, const WeakRun& run, double slack) {
  EnergyReport rep;
  const double m = run.levels.empty() ? 1.0 : run.levels.front().m;
  const double top = u0.max() + (run.schedule.empty() ? 0.0 : run.schedule.front());
  rep.initial_bound = m * m * std::pow(top, 2.0 * (m - 1.0)) * lap.gradient_inner(u0, u0);
  for (std::size_t k = 0; k < run.energy.size(); ++k) {
    const auto& e = run.energy[k];
    if (e.empty()) continue;
    const double e0 = e.front();
    rep.initial.push_back(e0);
    double worst = e0 > 0.0 ? 1.0 : 0.0;
    for (std::size_t f = 0; f < e.size(); ++f) {
      if (e0 > 0.0) worst = std::max(worst, e[f] / e0);
      if (e[f] > e0 * (1.0 + slack) + 1e-14) {
        std::ostringstream os;
        os << "level " << k << " frame " << f << ": energy " << e[f] << " exceeds initial " << e0;
        rep.violations.push_back(os.str());
      }
    }
    rep.worst_ratio.push_back(worst);
    if (e0 > 1.1 * rep.initial_bound + 1e-14) {
      std::ostringstream os;
      os << "level " << k << ": initial energy " << e0 << " above the bound " << rep.initial_bound;
      rep.violations.push_back(os.str());
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

double support_radius(const Field& u, double floor, double fraction) {
  const Grid& g = u.grid();
  std::vector<double> p(g.N());
  double peak = 0.0;
  for (int i = 0; i < g.N(); ++i) {
    p[i] = u.ring_mean(i) - floor;
    peak = std::max(peak, p[i]);
  }
  if (!(peak > 0.0)) return 0.0;
  const double thr = fraction * peak;
  for (int i = g.N() - 1; i >= 0; --i) {
    if (p[i] >= thr) {
      if (i == g.N() - 1) return g.radial.x[i];
      const double x0 = g.radial.x[i], x1 = g.radial.x[i + 1];
      return x0 + (x1 - x0) * (p[i] - thr) / (p[i] - p[i + 1]);
    }
  }
  return 0.0;
}

double growth_exponent(const std::vector<double>& t, const std::vector<double>& r) {
  if (t.size() != r.size() || t.size() < 2) throw std::invalid_argument("growth_exponent: need matching series");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double x = std::log(t[j]), y = std::log(r[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(t.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace conepme
