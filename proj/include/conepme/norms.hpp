#pragma once

// Weighted Mellin-Sobolev norms, E0 splitting and tip/Hölder diagnostics.

#include <optional>
#include <string>
#include <vector>

#include "conepme/field.hpp"
#include "conepme/laplacian.hpp"

namespace conepme {

struct NormSpec {
  int s = 0;             // 0, 1 or 2
  double gamma = -0.5;
  double p = 2.0;
  double collar = 0.0;   // <= 0: the manifold's collar length
};

// (sum over the collars of |x^{(n+1)/2-gamma} (x d_x)^j D_theta^a f|^p dx/x dtheta sqrt(det h)
//  + unweighted W^{s,p} over the body)^{1/p}.
// Throws std::invalid_argument for s outside {0,1,2} or p <= 1.
double mellin_norm(const Laplacian& lap, const Field& f, const NormSpec& spec);

// Smooth cutoff, 1 on [0, collar/2], 0 on [collar, inf).
double collar_cutoff(double r, double collar);

struct E0Split {
  std::vector<double> constants;  // one per tip
  std::vector<bool> diverged;     // extrapolation did not settle; innermost ring mean used instead
  Field remainder;
};

// Per tip, c0 is the quadratic extrapolation of the three innermost ring means;
// remainder = f - sum_tips cutoff * c0.
E0Split split_E0(const Field& f);

struct TipExpansion {
  int tip = 0;
  double constant = 0.0;
  double exponent = 0.0;  // NaN when flat
  double residual = 0.0;  // rms of the log-log fit
  double x_lo = 0.0;
  double x_hi = 0.0;
  bool flat = false;      // remainder below 1e-13 on the window
  bool diverged = false;
  int points = 0;
};

// Least-squares slope of log(sup_theta |remainder|) against log x on
// [x_lo, x_hi]; defaults to [4 x_min, collar/4].
TipExpansion tip_decay_rate(const Field& f, int tip, std::optional<double> x_lo = {},
                            std::optional<double> x_hi = {});

struct HolderEstimate {
  double space = 0.0;
  double time = 0.0;
  double ratio = 0.0;     // time / space
  bool space_saturated = false;
  bool time_saturated = false;
  bool degenerate = false;  // constant trajectory
};

inline constexpr double kHolderCap = 1.0;

// Empirical Hölder exponents from sup quotients at dyadic index offsets.
// Needs at least 8 frames; throws std::invalid_argument otherwise.
HolderEstimate holder_estimate(const std::vector<Field>& frames, const std::vector<double>& times);

}  // namespace conepme
