#pragma once

// Seeded initial data for the suites.

#include <cstdint>
#include <memory>

#include "conepme/field.hpp"
#include "conepme/grid.hpp"

namespace conepme::harness {

// Band-limited mode sum: radial cosines cos(k pi x / L), k < 4, times the
// angular basis functions b <= band (clamped to K/3), each non-constant mode
// carrying (phi/phi_max)^{q} with q its bounded tip exponent. Rescaled to [lo, hi].
Field random_smooth_field(const std::shared_ptr<const Grid>& g, std::uint64_t seed, double lo, double hi,
                          int band = 3);

// Same construction with equal-amplitude coefficients up to radial
// frequency N/4 and every angular basis function up to K/3: rough but resolved.
Field random_rough_field(const std::shared_ptr<const Grid>& g, std::uint64_t seed, double lo, double hi);

// offset + amplitude * radial(x) * B_b(theta), radial as above with k = 1.
Field single_mode_field(const std::shared_ptr<const Grid>& g, int basis, double offset, double amplitude);

// Flat-space Barenblatt profile U(t, r) = t^{-a} (C - k r^2 t^{-2b})_+^{1/(m-1)},
// a = d / (d (m - 1) + 2), b = a / d, k = a (m - 1) / (2 m d).
struct Barenblatt {
  double m = 2.0;
  int d = 2;
  double C = 1.0;

  double alpha() const;
  double beta() const;
  double value(double t, double r) const;
  double support_radius(double t) const;
  // C such that U(t, 0) = height.
  static Barenblatt with_peak(double m, int d, double t, double height);
};

Field barenblatt_field(const std::shared_ptr<const Grid>& g, const Barenblatt& b, double t);

}  // namespace conepme::harness
