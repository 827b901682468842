#pragma once

// Tensor grid: graded radial nodes times a spectral cross-section basis.

#include <memory>
#include <vector>

#include "conepme/geometry.hpp"

namespace conepme {

struct GridSpec {
  int radial_nodes = 128;     // N
  int angular_nodes = 32;     // K
  double x_min = 1e-5;        // distance of the innermost node to its tip
  double body_transition = 2.0;  // capped cone: computational coordinate where the map turns uniform
};

// Radial nodes are cell centres of a uniform computational coordinate s
// pushed through an analytic map x = X(s). Near a tip X is exponential,
// so s is the log variable there and x d/dx becomes a uniform difference.
//   suspension:  x = L / (1 + exp(-s))
//   capped cone: x = A log(1 + exp(s))
struct RadialGrid {
  ConeManifold::Topology topology{};
  double length = 0.0;
  int size = 0;
  double step = 0.0;  // h in s

  // node data, i = 0..N-1
  std::vector<double> s, x, x_right, dxds;
  // face data, f = 0..N (face f sits between nodes f-1 and f)
  std::vector<double> s_face, x_face, x_right_face, dxds_face;

  double s_lower = 0.0;
  double s_upper = 0.0;
  double map_scale = 0.0;  // L (suspension) or A (capped)

  // x and L - x at an arbitrary computational coordinate.
  void map(double s_value, double& x_out, double& x_right_out, double& dxds_out) const;

  // Distance of node i to the given tip (tip 0 at x = 0, tip 1 at x = L).
  double tip_distance(int i, int tip) const { return tip == 0 ? x[i] : x_right[i]; }
  // Node index order walking away from the tip.
  int from_tip(int k, int tip) const { return tip == 0 ? k : size - 1 - k; }
  // Ratio of consecutive nodes near the tip.
  double grading_ratio() const;
};

// Discrete basis on the cross-section: K nodes with quadrature weights
// (weights include the cross-section measure), K orthogonal basis functions
// evaluated at the nodes together with their gradient component.
struct AngularBasis {
  CrossSection cross_section;
  int size = 0;
  std::vector<double> nodes;    // theta (circle) or polar angle psi (sphere)
  std::vector<double> weights;  // quadrature weights, sum = cross-section measure
  std::vector<double> values;   // [b * K + k] basis b at node k
  std::vector<double> grads;    // [b * K + k] unit-metric derivative along the section
  std::vector<double> norms;    // discrete sum_k w_k B_b(k)^2
  std::vector<int> mode_of;     // distinct-eigenvalue index j of basis b
  int mode_count = 0;           // number of distinct j

  double value(int b, int k) const { return values[static_cast<std::size_t>(b) * size + k]; }
  double grad(int b, int k) const { return grads[static_cast<std::size_t>(b) * size + k]; }
};

AngularBasis make_angular_basis(const CrossSection& cs, int K);

struct Grid {
  ConeManifold manifold;
  GridSpec spec;
  RadialGrid radial;
  AngularBasis angular;
  // phi at nodes and faces
  std::vector<double> phi, phi_face;
  // per-node radial volume density phi^n * dx/ds; multiply by h and an angular weight.
  std::vector<double> volume_density;
  // Same, with the innermost cell of each tip extended to the tip itself:
  // the ball volume int_0^{x_face} phi^n dx is added there. This is the weight
  // of the angular mean (mode 0); non-constant modes use volume_density.
  std::vector<double> mean_volume_density;
  double tip_ball[2] = {0.0, 0.0};

  int N() const { return radial.size; }
  int K() const { return angular.size; }
  int n() const { return manifold.n(); }
  std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * angular.size + k; }
  // Quadrature weight of node (i, k) for integrals against d mu_g, tip balls included.
  double cell_volume(int i, int k) const { return mean_volume_density[i] * radial.step * angular.weights[k]; }
};

// Throws std::invalid_argument for invalid manifolds or grid sizes.
std::shared_ptr<const Grid> make_grid(const ConeManifold& manifold, const GridSpec& spec);

}  // namespace conepme
