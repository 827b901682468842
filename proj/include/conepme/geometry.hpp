#pragma once

// Cone geometry: cross-section spectra, indicial roots and admissible
// Mellin weight windows for compact manifolds with conical tips.

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace conepme {

// Cross-section of the cone. A circle is parametrized by an angle in
// [0, 2*pi) with metric c^2 dtheta^2 (circumference 2*pi*c); a round sphere
// S^d is the unit sphere, of which only axisymmetric data are represented.
struct CrossSection {
  enum class Kind { circle, round_sphere };

  Kind kind = Kind::circle;
  double circumference_scale = 1.0;  // c, circle only
  int sphere_dim = 2;                // d, sphere only
  bool axisymmetric_only = true;     // sphere only; must stay true

  static CrossSection circle(double c);
  static CrossSection sphere(int d);

  // n, the cross-section dimension
  int dimension() const;
  // Total measure of the cross-section under h(0).
  double measure() const;
  std::string describe() const;
};

struct Eigenvalue {
  double value;      // lambda_j <= 0
  int multiplicity;  // full multiplicity on the cross-section
};

// The J distinct eigenvalues of the cross-section Laplacian closest to zero,
// in decreasing order starting at 0.
std::vector<Eigenvalue> cross_section_spectrum(const CrossSection& cs, int count);

// Lambda_j for the distinct mode index j, without building the list.
double cross_section_eigenvalue(const CrossSection& cs, int j);

// Warp profile phi(x) of the metric dx^2 + phi(x)^2 h(0).
struct WarpProfile {
  enum class Kind { linear, sine };

  Kind kind = Kind::sine;
  double scale = 1.0;  // a in phi(x) = a sin(x / a)

  static WarpProfile linear();
  static WarpProfile sine(double a);

  // phi evaluated at distance x from the left tip; for the sine profile on a
  // suspension `x_right` (distance to the right tip) keeps accuracy there.
  double value(double x, double x_right) const;
  double derivative(double x) const;
};

struct ConeManifold {
  enum class Topology { suspension, capped_cone };

  CrossSection cross_section;
  Topology topology = Topology::suspension;
  WarpProfile warp;
  double outer_radius = 1.0;   // capped cone only
  double collar_length = 0.5;  // collar width at each tip

  static ConeManifold suspension(CrossSection cs, double warp_scale = 1.0);
  static ConeManifold capped(CrossSection cs, double radius, WarpProfile warp = WarpProfile::linear());

  int n() const { return cross_section.dimension(); }
  // Length L of the radial interval.
  double length() const;
  int tip_count() const { return topology == Topology::suspension ? 2 : 1; }
  // Analytic total volume.
  double volume() const;

  // Throws std::invalid_argument when the invariants fail.
  void check() const;
};

struct IndicialPair {
  double minus;
  double plus;
  bool double_root;
};

// Roots of z^2 - (n-1) z + lambda.
IndicialPair indicial_roots(int n, double lambda);

// Model solutions near a tip are x^{-q} for the roots q above; the one that
// stays bounded for lambda < 0 is x^{-q^-}. Returns -q^- (>= 0).
double decay_exponent(int n, double lambda);

std::complex<double> conormal_symbol(std::complex<double> z, int n, double lambda);

// -(n-1)/2 + sqrt(((n-1)/2)^2 - lambda_1). Throws std::domain_error if lambda_1 >= 0.
double epsilon_bar(int n, double lambda1);

struct WeightWindow {
  double lower;
  double upper;
  bool contains(double gamma) const { return gamma > lower && gamma < upper; }
};

WeightWindow weight_window(int n, double lambda1);

struct IndicialData {
  struct Entry {
    double lambda;
    IndicialPair roots;
  };
  std::vector<Entry> entries;
  double epsilon_bar = 0.0;
};

IndicialData indicial_data(const ConeManifold& m, int count);

struct WeightParams {
  double gamma = -0.5;
  double p = 8.0;
  double q = 8.0;
  double s0 = 0.0;
  double pole_cutoff = 10.0;
};

struct WeightConfig {
  WeightParams params;
  WeightWindow window{};
  double epsilon_bar = 0.0;
  bool valid = false;
  std::vector<std::string> violations;
};

// Total: never throws for finite input, reports each failed constraint.
WeightConfig validate_params(const ConeManifold& m, const WeightParams& params);

}  // namespace conepme
