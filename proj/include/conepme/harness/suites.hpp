#pragma once

// Theorem-verification suites over solver runs.

#include <cstdint>
#include <vector>

#include "conepme/evolution.hpp"
#include "conepme/harness/config.hpp"
#include "conepme/harness/report.hpp"
#include "conepme/norms.hpp"

namespace conepme::harness {

// Two independent solves from c0 <= u01 <= u02 (run concurrently);
// min over frames of (u2 - u1) >= -ordering and min u1 >= c0 - bounds.
// Unordered or nonpositive inputs are recorded as failed preconditions.
VerificationReport run_comparison(const Laplacian& lap, const Field& u01, const Field& u02, const SolveControls& c,
                                  const Tolerances& tol);

// Seeded ordered pairs on the lap grid: u01 in [1, 2], u02 = u01 + a smooth
// field in [0, 0.2]. One report entry per (seed, m).
VerificationReport run_comparison_batch(const Laplacian& lap, const std::vector<std::uint64_t>& seeds,
                                        const std::vector<double>& ms, const SolveControls& c, const Tolerances& tol);

// c0 - bounds <= u <= c1 + bounds on every frame, monotone max/min hull,
// relative mass drift, and u^m = w per frame.
VerificationReport run_bounds(const Laplacian& lap, const Field& u0, double c0, double c1, const SolveControls& c,
                              const Tolerances& tol);

// Constant data stays constant to `tolerance` in max norm.
VerificationReport run_constants(const Laplacian& lap, double value, const SolveControls& c, double tolerance);

// The run reaches T and ends within `tolerance` of mass / volume.
VerificationReport run_long_time(const Laplacian& lap, const Field& u0, const SolveControls& c, double tolerance);

struct SmoothingOptions {
  int modes = 3;            // distinct modes j = 1..modes
  bool rates = true;        // rate ordering r_1 < r_2 < ...
  bool norms = true;        // s=2 / s=0 ratio drop
  double t_early = -1.0;    // < 0: first frame after t = 0
  double t_late = -1.0;     // < 0: T / 2
  NormSpec norm{0, -0.5, 2.0, 0.0};  // s is overridden
};

// Exponential decay rates of the modal energies E_j (least squares on the
// second half of the frames) must increase with j; mellin_norm s=2 over s=0
// must be finite and smaller at t_late than at t_early. Needs >= 4 frames.
VerificationReport smoothing_report(const Laplacian& lap, const Trajectory& traj, const SmoothingOptions& o = {});

}  // namespace conepme::harness
