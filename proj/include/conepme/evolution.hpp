#pragma once

// Porous medium flow u' = Delta(u^m) for strictly positive data.
//
// Each implicit Euler step solves u_new - dt * Delta w_new = u_old with
// u = w^{1/m}. The nonlinearity is resolved by sweeps
//   (B - dt L) (w_{k+1} - w_k) = u_old - u_k + dt L w_k,   B ~ du/dw at w_k,
// with B frozen per ring (lagged) or pointwise (Newton). The step finishes
// with u_new = u_k + B (w_{k+1} - w_k), which keeps the discrete mass
// exactly, and w_new = u_new^m.

#include <string>
#include <vector>

#include "conepme/field.hpp"
#include "conepme/laplacian.hpp"

namespace conepme {

struct SolveControls {
  double m = 2.0;
  double T = 1.0;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 0.05;
  bool newton = false;
  double tolerance = 1e-5;        // local error per step, relative to max |u|
  double sweep_tolerance = 1e-11;  // relative update that ends the sweeps
  int max_sweeps = 40;
  bool adaptive = true;           // false: no error control, dt still ramps by 1.2 up to dt_max
  double frame_interval = 0.1;    // frames at multiples of this (and at T)
  std::vector<double> output_times;  // extra frame times

  // Throws std::invalid_argument when the controls are inconsistent.
  void check() const;
};

struct FrameDiagnostics {
  double mass = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> modal_energy;  // L2 energy of u per distinct eigenvalue
  double gradient_energy = 0.0;      // Dirichlet energy of w
};

struct Frame {
  double t = 0.0;
  Field w;
  Field u;
  FrameDiagnostics diag;
};

struct Trajectory {
  double m = 1.0;
  std::vector<Frame> frames;
  std::vector<double> step_sizes;   // accepted steps
  std::vector<int> sweep_counts;    // per accepted step (sum over sub-steps)
  int rejected = 0;
  bool completed = false;
  bool experimental = false;  // m < 1
  std::string failure;

  std::vector<double> times() const;
  std::vector<Field> u_frames() const;
};

struct StepResult {
  bool ok = false;
  Field u;
  Field w;
  int sweeps = 0;
  std::string reason;
};

// One implicit step from u_old. Never clips: positivity loss or
// non-convergent sweeps return ok = false.
StepResult implicit_step(const Laplacian& lap, const Field& u_old, double dt, const SolveControls& c);

// w-form convenience wrapper: returns w_new, throws std::runtime_error on failure.
Field step(const Laplacian& lap, const Field& w, double dt, const SolveControls& c);

// Integrates from u0 (min u0 > 0) to T. Throws std::invalid_argument for
// nonpositive data or bad controls; dt underflow ends the run with
// completed = false and the frames reached so far.
Trajectory solve(const Laplacian& lap, const Field& u0, const SolveControls& c);

// Largest stable forward-Euler step for the w-form at state w.
double explicit_stability_bound(const Laplacian& lap, const Field& w, double m);

// Forward Euler on w' = m w^{(m-1)/m} Delta w with a fixed step; frames as in
// solve. Throws std::invalid_argument if dt_fixed exceeds the stability bound.
Trajectory explicit_reference(const Laplacian& lap, const Field& u0, const SolveControls& c, double dt_fixed);

double mass(const Laplacian& lap, const Field& f);
std::vector<double> modal_energies(const Laplacian& lap, const Field& f);
FrameDiagnostics diagnose_frame(const Laplacian& lap, const Field& u, const Field& w);

}  // namespace conepme
