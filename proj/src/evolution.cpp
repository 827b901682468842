#include "conepme/evolution.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conepme {

void SolveControls::check() const {
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
    throw std::invalid_argument("need 0 < dt_min <= dt_init <= dt_max");
  if (!(tolerance > 0.0) || !(sweep_tolerance > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least 1");
  if (!(frame_interval > 0.0)) throw std::invalid_argument("frame_interval must be positive");
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  for (const auto& f : frames) t.push_back(f.t);
  return t;
}

std::vector<Field> Trajectory::u_frames() const {
  std::vector<Field> u;
  for (const auto& f : frames) u.push_back(f.u);
  return u;
}

double mass(const Laplacian& lap, const Field& f) { return lap.integral(f); }

std::vector<double> modal_energies(const Laplacian& lap, const Field& f) {
  const Grid& g = lap.grid();
  const auto& a = g.angular;
  const ModeArray c = lap.to_modes(f);
  std::vector<double> e(a.mode_count, 0.0);
  for (int b = 0; b < g.K(); ++b) {
    const int j = a.mode_of[b];
    const auto& w = j == 0 ? g.mean_volume_density : g.volume_density;
    double s = 0.0;
    for (int i = 0; i < g.N(); ++i) s += w[i] * c(i, b) * c(i, b);
    e[j] += g.radial.step * a.norms[b] * s;
  }
  return e;
}

FrameDiagnostics diagnose_frame(const Laplacian& lap, const Field& u, const Field& w) {
  FrameDiagnostics d;
  d.mass = lap.integral(u);
  d.min = u.min();
  d.max = u.max();
  d.modal_energy = modal_energies(lap, u);
  d.gradient_energy = lap.gradient_inner(w, w);
  return d;
}

namespace {

Field power(const Field& f, double p) {
  return f.map([p](double v) { return std::pow(v, p); });
}

// Solves (B - dt L) x = rhs with B = pointwise multiplication by b, using a
// block tridiagonal elimination over rings in mode space.
ModeArray newton_solve(const Laplacian& lap, const Field& b, double dt, const ModeArray& rhs) {
  const Grid& g = lap.grid();
  const int N = g.N();
  const int K = g.K();
  const Eigen::MatrixXd& fw = lap.forward();
  const Eigen::MatrixXd& iv = lap.inverse();
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu(N);
  std::vector<Eigen::VectorXd> r(N);
  std::vector<Eigen::VectorXd> lower(N), upper(N);
  for (int i = 0; i < N; ++i) {
    lower[i].resize(K);
    upper[i].resize(K);
    for (int q = 0; q < K; ++q) {
      lower[i](q) = -dt * lap.mode_for_basis(q).lower[i];
      upper[i](q) = -dt * lap.mode_for_basis(q).upper[i];
    }
  }
  Eigen::MatrixXd prev_inv_c;  // D'_{i-1}^{-1} C_{i-1}
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd bi(K);
    for (int k = 0; k < K; ++k) bi(k) = b(i, k);
    // ring operator on column coefficient vectors
    Eigen::MatrixXd D = fw.transpose() * bi.asDiagonal() * iv.transpose();
    for (int q = 0; q < K; ++q) D(q, q) -= dt * lap.mode_for_basis(q).diag[i];
    r[i] = rhs.row(i).transpose();
    if (i > 0) {
      D -= lower[i].asDiagonal() * prev_inv_c;
      r[i] -= lower[i].asDiagonal() * lu[i - 1].solve(r[i - 1]);
    }
    lu[i].compute(D);
    prev_inv_c = lu[i].solve(Eigen::MatrixXd(upper[i].asDiagonal()));
  }
  ModeArray x(N, K);
  Eigen::VectorXd next = lu[N - 1].solve(r[N - 1]);
  x.row(N - 1) = next.transpose();
  for (int i = N - 2; i >= 0; --i) {
    next = lu[i].solve(r[i] - upper[i].asDiagonal() * next);
    x.row(i) = next.transpose();
  }
  return x;
}

}  // namespace

StepResult implicit_step(const Laplacian& lap, const Field& u_old, double dt, const SolveControls& c) {
  const Grid& g = lap.grid();
  const int N = g.N();
  const int K = g.K();
  const double m = c.m;
  StepResult res;

  Field u_k = u_old;
  Field w_k = power(u_old, m);
  std::vector<double> bbar(N);
  for (int sweep = 1; sweep <= c.max_sweeps; ++sweep) {
    res.sweeps = sweep;
    // b = du/dw = u^{1-m} / m
    Field b = u_k.map([m](double v) { return std::pow(v, 1.0 - m) / m; });
    if (!c.newton) {
      for (int i = 0; i < N; ++i) {
        double lo = b(i, 0), hi = b(i, 0);
        for (int k = 1; k < K; ++k) {
          lo = std::min(lo, b(i, k));
          hi = std::max(hi, b(i, k));
        }
        bbar[i] = 0.5 * (lo + hi);
        for (int k = 0; k < K; ++k) b(i, k) = bbar[i];
      }
    }
    // correction form: (B - dt L) delta = u_old - u_k + dt L w_k
    Field rhs = u_old - u_k;
    rhs.axpy(dt, lap.apply(w_k));
    ModeArray coeff = lap.to_modes(rhs);
    if (c.newton)
      coeff = newton_solve(lap, b, dt, coeff);
    else
      lap.solve_shifted(bbar, dt, coeff);
    const Field delta = lap.from_modes(coeff);
    if (!delta.all_finite()) {
      res.reason = "linear solve produced non-finite values";
      return res;
    }
    Field w_next = w_k + delta;
    const double change = delta.max_abs();
    const bool converged = m == 1.0 || change <= c.sweep_tolerance * w_next.max_abs();
    if (converged) {
      Field u_new = u_k;
      for (std::size_t j = 0; j < u_new.values().size(); ++j) u_new.values()[j] += b.values()[j] * delta.values()[j];
      u_new.refresh_tip_values();
      if (!(u_new.min() > 0.0)) {
        res.reason = "positivity lost";
        return res;
      }
      res.ok = true;
      res.w = power(u_new, m);
      res.u = std::move(u_new);
      return res;
    }
    if (!(w_next.min() > 0.0)) {
      res.reason = "positivity lost during sweeps";
      return res;
    }
    w_k = std::move(w_next);
    u_k = power(w_k, 1.0 / m);
  }
  res.reason = "sweeps did not converge";
  return res;
}

Field step(const Laplacian& lap, const Field& w, double dt, const SolveControls& c) {
  if (!(w.min() > 0.0)) throw std::invalid_argument("step: w must be strictly positive");
  StepResult r = implicit_step(lap, power(w, 1.0 / c.m), dt, c);
  if (!r.ok) throw std::runtime_error("step failed: " + r.reason);
  return r.w;
}

namespace {

std::vector<double> frame_schedule(const SolveControls& c) {
  std::vector<double> t;
  for (int k = 1;; ++k) {
    const double v = k * c.frame_interval;
    if (v >= c.T * (1.0 - 1e-12)) break;
    t.push_back(v);
  }
  for (double v : c.output_times)
    if (v > 0.0 && v < c.T) t.push_back(v);
  t.push_back(c.T);
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t)
    if (out.empty() || v - out.back() > 1e-12 * c.T) out.push_back(v);
  return out;
}

Frame make_frame(const Laplacian& lap, double t, const Field& u, const Field& w) {
  Frame f;
  f.t = t;
  f.u = u;
  f.w = w;
  f.diag = diagnose_frame(lap, u, w);
  return f;
}

}  // namespace

Trajectory solve(const Laplacian& lap, const Field& u0, const SolveControls& c) {
  c.check();
  if (!(u0.min() > 0.0)) throw std::invalid_argument("solve: initial data must be strictly positive");
  Trajectory traj;
  traj.m = c.m;
  traj.experimental = c.m < 1.0;
  Field u = u0;
  u.refresh_tip_values();
  Field w = power(u, c.m);
  traj.frames.push_back(make_frame(lap, 0.0, u, w));

  const auto schedule = frame_schedule(c);
  std::size_t next = 0;
  double t = 0.0;
  double dt = c.dt_init;
  while (next < schedule.size()) {
    const double target = schedule[next];
    double h = std::min(dt, c.dt_max);
    const bool landing = target - t <= h * (1.0 + 1e-9);
    if (landing) h = target - t;

    bool accepted = false;
    Field u_new, w_new;
    int sweeps = 0;
    if (c.adaptive) {
      StepResult full = implicit_step(lap, u, h, c);
      if (full.ok) {
        StepResult a = implicit_step(lap, u, 0.5 * h, c);
        if (a.ok) {
          StepResult b = implicit_step(lap, a.u, 0.5 * h, c);
          if (b.ok) {
            const double err = max_abs_difference(b.u, full.u) / u.max_abs();
            if (err <= c.tolerance) {
              accepted = true;
              sweeps = full.sweeps + a.sweeps + b.sweeps;
              u_new = std::move(b.u);
              w_new = std::move(b.w);
            }
          }
        }
      }
    } else {
      StepResult r = implicit_step(lap, u, h, c);
      if (r.ok) {
        accepted = true;
        sweeps = r.sweeps;
        u_new = std::move(r.u);
        w_new = std::move(r.w);
      }
    }

    if (!accepted) {
      ++traj.rejected;
      dt = 0.5 * h;
      if (dt < c.dt_min) {
        std::ostringstream os;
        os << "step size underflow at t = " << t;
        traj.failure = os.str();
        return traj;
      }
      continue;
    }
    u = std::move(u_new);
    w = std::move(w_new);
    traj.step_sizes.push_back(h);
    traj.sweep_counts.push_back(sweeps);
    if (landing) {
      t = target;
      traj.frames.push_back(make_frame(lap, t, u, w));
      ++next;
    } else {
      t += h;
    }
    if (!landing) dt = std::min(c.dt_max, 1.2 * h);
  }
  traj.completed = true;
  return traj;
}

double explicit_stability_bound(const Laplacian& lap, const Field& w, double m) {
  const double amax = m * std::pow(w.max(), (m - 1.0) / m);
  const double amin = m * std::pow(w.min(), (m - 1.0) / m);
  return 2.0 / (lap.spectral_radius_bound() * std::max(amax, amin));
}

Trajectory explicit_reference(const Laplacian& lap, const Field& u0, const SolveControls& c, double dt_fixed) {
  c.check();
  if (!(u0.min() > 0.0)) throw std::invalid_argument("explicit_reference: initial data must be strictly positive");
  Field u = u0;
  u.refresh_tip_values();
  Field w = power(u, c.m);
  const double bound = explicit_stability_bound(lap, w, c.m);
  if (!(dt_fixed > 0.0) || dt_fixed > bound) {
    std::ostringstream os;
    os << "explicit_reference: dt " << dt_fixed << " exceeds the stability bound " << bound;
    throw std::invalid_argument(os.str());
  }
  Trajectory traj;
  traj.m = c.m;
  traj.experimental = c.m < 1.0;
  traj.frames.push_back(make_frame(lap, 0.0, u, w));
  const double m = c.m;
  double t = 0.0;
  for (double target : frame_schedule(c)) {
    while (t < target) {
      double h = dt_fixed;
      if (target - t <= h * (1.0 + 1e-9)) h = target - t;
      const Field lw = lap.apply(w);
      for (std::size_t j = 0; j < w.values().size(); ++j) {
        const double wv = w.values()[j];
        w.values()[j] = wv + h * m * std::pow(wv, (m - 1.0) / m) * lw.values()[j];
      }
      w.refresh_tip_values();
      if (!(w.min() > 0.0)) {
        traj.failure = "explicit reference lost positivity";
        return traj;
      }
      traj.step_sizes.push_back(h);
      t = (h == target - t) ? target : t + h;
    }
    traj.frames.push_back(make_frame(lap, t, power(w, 1.0 / m), w));
  }
  traj.completed = true;
  return traj;
}

}  // namespace conepme
