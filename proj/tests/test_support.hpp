#pragma once

// Shared fixtures for the unit tests.

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "conepme/field.hpp"
#include "conepme/geometry.hpp"
#include "conepme/grid.hpp"

namespace testing_support {

inline std::shared_ptr<const conepme::Grid> suspension_grid(double c, int N, int K, double x_min = 1e-5) {
  auto m = conepme::ConeManifold::suspension(conepme::CrossSection::circle(c));
  return conepme::make_grid(m, {N, K, x_min, 2.0});
}

inline std::shared_ptr<const conepme::Grid> capped_grid(double c, int N, int K, double R = 1.0, double x_min = 1e-5) {
  auto m = conepme::ConeManifold::capped(conepme::CrossSection::circle(c), R);
  return conepme::make_grid(m, {N, K, x_min, 2.0});
}

// Random smooth field on a circle suspension or capped cone: mode-0 part a
// cosine series in x (even at the tips), angular modes j <= band carry the
// factor (phi/L)^{q_j^+} so the field is regular at every tip.
inline conepme::Field smooth_field(const std::shared_ptr<const conepme::Grid>& g, std::uint64_t seed, int band = 3,
                                   double offset = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto& m = g->manifold;
  const double L = m.length();
  const double c = m.cross_section.circumference_scale;
  double a[4][4][2];
  for (auto& r : a)
    for (auto& s : r)
      for (double& v : s) v = nd(rng);
  return conepme::Field::sample(g, [&](double x, double xr, double th) {
    double v = offset;
    const double phi = m.warp.value(x, xr) / L;
    for (int j = 0; j <= band && j < 4; ++j) {
      const double radial_factor = j == 0 ? 1.0 : std::pow(phi, j / c);
      for (int k = 0; k < 3; ++k) {
        const double rk = std::cos(k * std::numbers::pi * x / L);
        v += 0.2 * radial_factor * rk * (a[j][k][0] * std::cos(j * th) + (j > 0 ? a[j][k][1] * std::sin(j * th) : 0.0));
      }
    }
    return v;
  });
}

// smooth_field rescaled onto [lo, hi]
inline conepme::Field positive_field(const std::shared_ptr<const conepme::Grid>& g, std::uint64_t seed, double lo,
                                     double hi, int band = 3) {
  conepme::Field f = smooth_field(g, seed, band);
  const double a = f.min();
  const double b = f.max();
  return f.map([=](double v) { return lo + (hi - lo) * (v - a) / (b - a); });
}

}  // namespace testing_support
