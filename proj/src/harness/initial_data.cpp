#include "conepme/harness/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace conepme::harness {

namespace {

std::vector<double> tip_factor(const Grid& g, int basis) {
  std::vector<double> f(g.N(), 1.0);
  if (g.angular.mode_of[basis] == 0) return f;
  const double q = decay_exponent(g.n(), cross_section_eigenvalue(g.manifold.cross_section, g.angular.mode_of[basis]));
  const double top = *std::max_element(g.phi.begin(), g.phi.end());
  for (int i = 0; i < g.N(); ++i) f[i] = std::pow(g.phi[i] / top, q);
  return f;
}

Field rescale(Field f, double lo, double hi) {
  const double a = f.min();
  const double b = f.max();
  if (!(b > a)) return Field(f.grid_ptr(), lo);
  return f.map([=](double v) { return lo + (hi - lo) * (v - a) / (b - a); });
}

Field mode_sum(const std::shared_ptr<const Grid>& g, std::uint64_t seed, int radial_count, int basis_count,
               double decay) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double L = g->manifold.length();
  Field f(g);
  for (int b = 0; b < basis_count; ++b) {
    const auto tip = tip_factor(*g, b);
    for (int k = 0; k < radial_count; ++k) {
      const double a = nd(rng) * std::pow(1.0 + k + b, -decay);
      for (int i = 0; i < g->N(); ++i) {
        const double r = a * tip[i] * std::cos(k * std::numbers::pi * g->radial.x[i] / L);
        for (int j = 0; j < g->K(); ++j) f(i, j) += r * g->angular.value(b, j);
      }
    }
  }
  f.refresh_tip_values();
  return f;
}

}  // namespace

Field random_smooth_field(const std::shared_ptr<const Grid>& g, std::uint64_t seed, double lo, double hi, int band) {
  if (!(hi >= lo)) throw std::invalid_argument("random_smooth_field: need lo <= hi");
  // basis functions come in cos/sin pairs on a circle; band counts distinct modes
  const int limit = std::max(1, g->K() / 3);
  int count = 0;
  while (count < g->K() && g->angular.mode_of[count] <= band && count < limit) ++count;
  return rescale(mode_sum(g, seed, 4, count, 1.0), lo, hi);
}

Field random_rough_field(const std::shared_ptr<const Grid>& g, std::uint64_t seed, double lo, double hi) {
  if (!(hi >= lo)) throw std::invalid_argument("random_rough_field: need lo <= hi");
  return rescale(mode_sum(g, seed, std::max(4, g->N() / 4), std::max(1, g->K() / 3), 0.0), lo, hi);
}

Field single_mode_field(const std::shared_ptr<const Grid>& g, int basis, double offset, double amplitude) {
  if (basis < 0 || basis >= g->K()) throw std::invalid_argument("single_mode_field: basis index out of range");
  const auto tip = tip_factor(*g, basis);
  Field f(g, offset);
  for (int i = 0; i < g->N(); ++i)
    for (int j = 0; j < g->K(); ++j) f(i, j) += amplitude * tip[i] * g->angular.value(basis, j);
  f.refresh_tip_values();
  return f;
}

double Barenblatt::alpha() const { return d / (d * (m - 1.0) + 2.0); }
double Barenblatt::beta() const { return alpha() / d; }

double Barenblatt::value(double t, double r) const {
  const double k = alpha() * (m - 1.0) / (2.0 * m * d);
  const double core = C - k * r * r * std::pow(t, -2.0 * beta());
  return core > 0.0 ? std::pow(t, -alpha()) * std::pow(core, 1.0 / (m - 1.0)) : 0.0;
}

double Barenblatt::support_radius(double t) const {
  const double k = alpha() * (m - 1.0) / (2.0 * m * d);
  return std::sqrt(C / k) * std::pow(t, beta());
}

Barenblatt Barenblatt::with_peak(double m, int d, double t, double height) {
  if (!(m > 1.0)) throw std::invalid_argument("Barenblatt: need m > 1");
  Barenblatt b{m, d, 1.0};
  b.C = std::pow(height * std::pow(t, b.alpha()), m - 1.0);
  return b;
}

Field barenblatt_field(const std::shared_ptr<const Grid>& g, const Barenblatt& b, double t) {
  if (g->manifold.topology != ConeManifold::Topology::capped_cone)
    throw std::invalid_argument("barenblatt_field: needs a capped cone (distance to the tip is the radius)");
  return Field::sample(g, [&](double x, double, double) { return b.value(t, x); });
}

}  // namespace conepme::harness
