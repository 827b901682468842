#include "conepme/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conepme {

namespace {

double binomial(int n, int k) {
  if (k < 0 || n < k) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Dimension of degree-l spherical harmonics on S^d.
int harmonic_dimension(int l, int d) {
  return static_cast<int>(std::lround(binomial(l + d, d) - binomial(l + d - 2, d)));
}

}  // namespace

CrossSection CrossSection::circle(double c) {
  CrossSection cs;
  cs.kind = Kind::circle;
  cs.circumference_scale = c;
  return cs;
}

CrossSection CrossSection::sphere(int d) {
  CrossSection cs;
  cs.kind = Kind::round_sphere;
  cs.sphere_dim = d;
  return cs;
}

int CrossSection::dimension() const { return kind == Kind::circle ? 1 : sphere_dim; }

double CrossSection::measure() const {
  if (kind == Kind::circle) return 2.0 * std::numbers::pi * circumference_scale;
  const double d1 = sphere_dim + 1;
  return 2.0 * std::pow(std::numbers::pi, d1 / 2.0) / std::tgamma(d1 / 2.0);
}

std::string CrossSection::describe() const {
  std::ostringstream os;
  if (kind == Kind::circle)
    os << "circle(c=" << circumference_scale << ")";
  else
    os << "sphere(d=" << sphere_dim << ")";
  return os.str();
}

double cross_section_eigenvalue(const CrossSection& cs, int j) {
  switch (cs.kind) {
    case CrossSection::Kind::circle: {
      const double k = j / cs.circumference_scale;
      return -k * k;
    }
    case CrossSection::Kind::round_sphere:
      return -static_cast<double>(j) * (j + cs.sphere_dim - 1);
  }
  throw std::invalid_argument("unsupported cross-section kind");
}

std::vector<Eigenvalue> cross_section_spectrum(const CrossSection& cs, int count) {
  if (count < 1) throw std::invalid_argument("cross_section_spectrum: count must be >= 1");
  std::vector<Eigenvalue> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    int mult = 1;
    if (cs.kind == CrossSection::Kind::circle)
      mult = j == 0 ? 1 : 2;
    else if (cs.kind == CrossSection::Kind::round_sphere)
      mult = harmonic_dimension(j, cs.sphere_dim);
    else
      throw std::invalid_argument("unsupported cross-section kind");
    out.push_back({cross_section_eigenvalue(cs, j), mult});
  }
  return out;
}

WarpProfile WarpProfile::linear() { return {Kind::linear, 1.0}; }
WarpProfile WarpProfile::sine(double a) { return {Kind::sine, a}; }

double WarpProfile::value(double x, double x_right) const {
  if (kind == Kind::linear) return x;
  // sin(x/a) == sin(x_right/a) on a suspension of length pi*a; use the
  // smaller argument so that both tips resolve to full relative precision.
  const double arg = std::min(x, x_right) / scale;
  return scale * std::sin(arg);
}

double WarpProfile::derivative(double x) const {
  if (kind == Kind::linear) return 1.0;
  return std::cos(x / scale);
}

ConeManifold ConeManifold::suspension(CrossSection cs, double warp_scale) {
  ConeManifold m;
  m.cross_section = cs;
  m.topology = Topology::suspension;
  m.warp = WarpProfile::sine(warp_scale);
  m.collar_length = 0.25 * m.length();
  return m;
}

ConeManifold ConeManifold::capped(CrossSection cs, double radius, WarpProfile warp) {
  ConeManifold m;
  m.cross_section = cs;
  m.topology = Topology::capped_cone;
  m.warp = warp;
  m.outer_radius = radius;
  m.collar_length = 0.5 * radius;
  return m;
}

double ConeManifold::length() const {
  if (topology == Topology::suspension) return std::numbers::pi * warp.scale;
  return outer_radius;
}

double ConeManifold::volume() const {
  const int dim = n();
  const double L = length();
  double radial = 0.0;
  if (warp.kind == WarpProfile::Kind::linear) {
    radial = std::pow(L, dim + 1) / (dim + 1);
  } else {
    // int_0^L (a sin(x/a))^n dx via the Wallis-type recursion on sin^n.
    const double a = warp.scale;
    const double theta_end = L / a;
    // I_k(t) = int_0^t sin^k
    double i0 = theta_end;
    double i1 = 1.0 - std::cos(theta_end);
    double ik = dim == 0 ? i0 : i1;
    double prev2 = i0;
    double prev1 = i1;
    for (int k = 2; k <= dim; ++k) {
      ik = (-std::pow(std::sin(theta_end), k - 1) * std::cos(theta_end) + (k - 1) * prev2) / k;
      prev2 = prev1;
      prev1 = ik;
    }
    radial = std::pow(a, dim + 1) * ik;
  }
  return radial * cross_section.measure();
}

void ConeManifold::check() const {
  if (cross_section.kind == CrossSection::Kind::circle && !(cross_section.circumference_scale > 0.0))
    throw std::invalid_argument("circle circumference must be positive");
  if (cross_section.kind == CrossSection::Kind::round_sphere) {
    if (cross_section.sphere_dim < 2) throw std::invalid_argument("sphere dimension must be >= 2");
    if (!cross_section.axisymmetric_only)
      throw std::invalid_argument("only axisymmetric data are supported on sphere cross-sections");
  }
  if (!(warp.scale > 0.0)) throw std::invalid_argument("warp scale must be positive");
  if (topology == Topology::suspension && warp.kind != WarpProfile::Kind::sine)
    throw std::invalid_argument("a suspension needs a profile vanishing at both ends (sine)");
  if (topology == Topology::capped_cone) {
    if (!(outer_radius > 0.0)) throw std::invalid_argument("outer radius must be positive");
    if (warp.kind == WarpProfile::Kind::sine && !(outer_radius < std::numbers::pi * warp.scale))
      throw std::invalid_argument("sine warp must stay positive up to the outer radius");
  }
  const double L = length();
  if (!(collar_length > 0.0) || collar_length > L)
    throw std::invalid_argument("collar length must lie in (0, L]");
  if (topology == Topology::suspension && collar_length > 0.5 * L)
    throw std::invalid_argument("collars of a suspension must not overlap");
}

IndicialPair indicial_roots(int n, double lambda) {
  const double half = 0.5 * (n - 1);
  const double disc = half * half - lambda;
  const double root = std::sqrt(std::max(disc, 0.0));
  return {half - root, half + root, disc == 0.0};
}

double decay_exponent(int n, double lambda) { return -indicial_roots(n, lambda).minus; }

std::complex<double> conormal_symbol(std::complex<double> z, int n, double lambda) {
  return z * z - static_cast<double>(n - 1) * z + lambda;
}

double epsilon_bar(int n, double lambda1) {
  if (!(lambda1 < 0.0)) throw std::domain_error("epsilon_bar: lambda_1 must be negative");
  const double half = 0.5 * (n - 1);
  return -half + std::sqrt(half * half - lambda1);
}

WeightWindow weight_window(int n, double lambda1) {
  const double eps = epsilon_bar(n, lambda1);
  const double lo = 0.5 * (n - 3);
  return {lo, lo + std::min(eps, 2.0)};
}

IndicialData indicial_data(const ConeManifold& m, int count) {
  IndicialData out;
  const auto spec = cross_section_spectrum(m.cross_section, std::max(count, 2));
  for (int j = 0; j < count; ++j)
    out.entries.push_back({spec[j].value, indicial_roots(m.n(), spec[j].value)});
  out.epsilon_bar = epsilon_bar(m.n(), spec[1].value);
  return out;
}

WeightConfig validate_params(const ConeManifold& m, const WeightParams& params) {
  WeightConfig cfg;
  cfg.params = params;
  const int n = m.n();
  const double lambda1 = cross_section_eigenvalue(m.cross_section, 1);
  cfg.epsilon_bar = epsilon_bar(n, lambda1);
  cfg.window = weight_window(n, lambda1);

  const double gamma = params.gamma;
  const double p = params.p;
  const double q = params.q;

  if (!(p > 1.0) || !std::isfinite(p)) cfg.violations.emplace_back("p in (1,inf)");
  if (!(q > 1.0) || !std::isfinite(q)) cfg.violations.emplace_back("q in (1,inf)");
  if (!cfg.window.contains(gamma)) cfg.violations.emplace_back("gamma-window");

  const double sum = (n + 1) / p + 2.0 / q;
  if (!(sum < 1.0)) cfg.violations.emplace_back("(n+1)/p+2/q<1");
  if (!(gamma > 0.5 * (n - 3) + 2.0 / q)) cfg.violations.emplace_back("gamma>(n-3)/2+2/q");
  if (!(params.s0 > -1.0 + sum)) cfg.violations.emplace_back("s0>-1+(n+1)/p+2/q");

  // The weight line must avoid every indicial root below the cutoff.
  const double target = 0.5 * (n - 3) - gamma;
  const double cutoff = params.pole_cutoff;
  for (int j = 0;; ++j) {
    const auto r = indicial_roots(n, cross_section_eigenvalue(m.cross_section, j));
    if (r.plus > cutoff && r.minus < -cutoff) break;
    bool hit = false;
    for (double root : {r.minus, r.plus}) {
      if (std::abs(root) > cutoff) continue;
      if (std::abs(root - target) <= 1e-12 * std::max(1.0, std::abs(root))) hit = true;
    }
    if (hit) {
      cfg.violations.emplace_back("pole-exclusion");
      break;
    }
    if (j > 100000) break;
  }

  cfg.valid = cfg.violations.empty();
  return cfg;
}

}  // namespace conepme
