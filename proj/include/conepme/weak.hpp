#pragma once

// Weak solutions for nonnegative data by monotone regularization: each
// level solves the flow from (u0 + delta_k), the deepest level is the limit.

#include <functional>
#include <string>
#include <vector>

#include "conepme/evolution.hpp"

namespace conepme {

struct WeakControls {
  SolveControls solve;           // m >= 1 required
  std::vector<double> schedule;  // strictly decreasing, positive; empty: default
  int levels = 6;                // used by the default schedule
  double gap_tolerance = 1e-3;   // last inter-level gap that counts as converged
  bool parallel = true;
};

// Fixed-step settings shared by all levels so that levels stay comparable.
WeakControls default_weak_controls(double m, double T);

// delta_k = 2^{-k} max(1, max u0), k = 1..levels
std::vector<double> default_schedule(const Field& u0, int levels);

struct WeakRun {
  std::vector<double> schedule;
  std::vector<Trajectory> levels;
  std::vector<std::vector<double>> gaps;    // [k][frame] max |w_{k+1} - w_k|
  std::vector<std::vector<double>> energy;  // [k][frame] Dirichlet energy of w_k
  double last_gap = 0.0;
  bool converged = false;
  bool failed = false;
  int failed_level = -1;
  std::string failure;

  const Trajectory& limit() const { return levels.back(); }
};

// Throws std::invalid_argument for m < 1, negative data or a bad schedule.
WeakRun solve_weak(const Laplacian& lap, const Field& u0, const WeakControls& c);

// Largest violation of w_{k+1} <= w_k over all levels and frames (<= 0 when ordered).
double level_monotonicity(const WeakRun& run);

// Time profile tau with tau(T) = 0. primitive(a, b) = int_a^b tau.
struct TimeProfile {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double, double)> primitive;
};

std::vector<TimeProfile> builtin_time_profiles(double T);

struct WeakResidual {
  double max_scaled = 0.0;  // max over the family of |residual| / scale
  double max_raw = 0.0;
  std::string worst;
  std::vector<std::string> names;
  std::vector<double> scaled;
};

// int int <grad phi, grad v^m> - phi_t v  -  int phi(0) v(0) for phi = A(x, theta) tau(t).
// Throws std::invalid_argument if tau(T) != 0.
double weak_residual_single(const Laplacian& lap, const Trajectory& traj, const Field& spatial,
                            const TimeProfile& tau, double* scale = nullptr);

// Built-in family: 3 radial bumps x 3 angular factors x 3 time profiles.
std::vector<std::pair<std::string, Field>> builtin_spatial_tests(const Laplacian& lap);
WeakResidual weak_residual(const Laplacian& lap, const Trajectory& traj);

struct EnergyReport {
  std::vector<double> initial;      // per level
  std::vector<double> worst_ratio;  // per level, max_t E(t) / E(0)
  double initial_bound = 0.0;       // m^2 (max u0 + delta_1)^{2(m-1)} int |grad u0|^2
  bool ok = true;
  std::vector<std::string> violations;
};

EnergyReport energy_check(const Laplacian& lap, const Field& u0, const WeakRun& run, double slack = 1e-6);

// Radius where the ring-mean profile of (u - floor) falls to fraction * its maximum.
double support_radius(const Field& u, double floor, double fraction = 0.1);

// Least-squares slope of log r against log t.
double growth_exponent(const std::vector<double>& t, const std::vector<double>& r);

}  // namespace conepme
