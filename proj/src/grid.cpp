#include "conepme/grid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conepme {

namespace {

double softplus(double s) { return s > 30.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }
double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Gauss quadrature for the weight (1 - t^2)^(alpha - 1/2) on [-1, 1] by
// Golub-Welsch on the monic Gegenbauer recurrence.
void gegenbauer_gauss(int K, double alpha, std::vector<double>& t, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(K, K);
  for (int l = 1; l < K; ++l) {
    const double beta = l * (l + 2.0 * alpha - 1.0) / (4.0 * (l + alpha) * (l + alpha - 1.0));
    J(l, l - 1) = J(l - 1, l) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(alpha + 0.5) / std::tgamma(alpha + 1.0);
  t.resize(K);
  w.resize(K);
  for (int k = 0; k < K; ++k) {
    t[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    w[k] = mu0 * v0 * v0;
  }
}

// C_0..C_{L-1} of parameter alpha at t.
std::vector<double> gegenbauer_values(int L, double alpha, double t) {
  std::vector<double> c(std::max(L, 1), 0.0);
  c[0] = 1.0;
  if (L > 1) c[1] = 2.0 * alpha * t;
  for (int l = 1; l + 1 < L; ++l)
    c[l + 1] = (2.0 * t * (l + alpha) * c[l] - (l + 2.0 * alpha - 1.0) * c[l - 1]) / (l + 1.0);
  return c;
}

// int_0^radius phi(y)^n dy, 8-point Gauss-Legendre (radius is tiny).
double tip_ball_volume(const WarpProfile& warp, double radius, int n) {
  static constexpr double nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                      0.9602898564975363};
  static constexpr double weights[4] = {0.3626837833783620, 0.3137066178876663, 0.2223810344533745,
                                        0.1012285362903763};
  double s = 0.0;
  for (int k = 0; k < 4; ++k)
    for (double sign : {-1.0, 1.0}) {
      const double y = 0.5 * radius * (1.0 + sign * nodes[k]);
      s += weights[k] * std::pow(warp.value(y, y), n);
    }
  return 0.5 * radius * s;
}

}  // namespace

void RadialGrid::map(double sv, double& xo, double& xro, double& do_) const {
  if (topology == ConeManifold::Topology::suspension) {
    xo = map_scale * sigmoid(sv);
    xro = map_scale * sigmoid(-sv);
    do_ = map_scale * sigmoid(sv) * sigmoid(-sv);
  } else {
    xo = map_scale * softplus(sv);
    xro = length - xo;
    do_ = map_scale * sigmoid(sv);
  }
}

double RadialGrid::grading_ratio() const { return x[1] / x[0]; }

AngularBasis make_angular_basis(const CrossSection& cs, int K) {
  AngularBasis ab;
  ab.cross_section = cs;
  ab.size = K;
  ab.nodes.resize(K);
  ab.weights.resize(K);
  ab.values.assign(static_cast<std::size_t>(K) * K, 0.0);
  ab.grads.assign(static_cast<std::size_t>(K) * K, 0.0);
  ab.norms.assign(K, 0.0);
  ab.mode_of.assign(K, 0);

  if (cs.kind == CrossSection::Kind::circle) {
    if (K < 2 || K % 2 != 0) throw std::invalid_argument("circle grids need an even K >= 2");
    const double c = cs.circumference_scale;
    for (int k = 0; k < K; ++k) {
      ab.nodes[k] = 2.0 * std::numbers::pi * k / K;
      ab.weights[k] = 2.0 * std::numbers::pi * c / K;
    }
    auto set = [&](int b, int freq, bool is_sin) {
      ab.mode_of[b] = freq;
      for (int k = 0; k < K; ++k) {
        const double th = freq * ab.nodes[k];
        const std::size_t at = static_cast<std::size_t>(b) * K + k;
        if (is_sin) {
          ab.values[at] = std::sin(th);
          ab.grads[at] = freq / c * std::cos(th);
        } else {
          ab.values[at] = std::cos(th);
          ab.grads[at] = -freq / c * std::sin(th);
        }
      }
    };
    set(0, 0, false);
    for (int f = 1; f < K / 2; ++f) {
      set(2 * f - 1, f, false);
      set(2 * f, f, true);
    }
    set(K - 1, K / 2, false);
    ab.mode_count = K / 2 + 1;
  } else {
    if (K < 1) throw std::invalid_argument("sphere grids need K >= 1");
    const double alpha = 0.5 * (cs.sphere_dim - 1);
    std::vector<double> t, w;
    gegenbauer_gauss(K, alpha, t, w);
    // measure of S^{d-1}
    const double ring = 2.0 * std::pow(std::numbers::pi, 0.5 * cs.sphere_dim) / std::tgamma(0.5 * cs.sphere_dim);
    for (int k = 0; k < K; ++k) {
      ab.nodes[k] = std::acos(t[k]);
      ab.weights[k] = ring * w[k];
      const auto c = gegenbauer_values(K, alpha, t[k]);
      const auto dc = gegenbauer_values(K, alpha + 1.0, t[k]);
      const double sn = std::sqrt(std::max(0.0, 1.0 - t[k] * t[k]));
      for (int l = 0; l < K; ++l) {
        const std::size_t at = static_cast<std::size_t>(l) * K + k;
        ab.values[at] = c[l];
        ab.grads[at] = l == 0 ? 0.0 : -sn * 2.0 * alpha * dc[l - 1];
      }
    }
    for (int l = 0; l < K; ++l) ab.mode_of[l] = l;
    ab.mode_count = K;
  }

  for (int b = 0; b < K; ++b) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += ab.weights[k] * ab.value(b, k) * ab.value(b, k);
    ab.norms[b] = s;
  }
  return ab;
}

std::shared_ptr<const Grid> make_grid(const ConeManifold& manifold, const GridSpec& spec) {
  manifold.check();
  const int N = spec.radial_nodes;
  if (N < 8) throw std::invalid_argument("grid too coarse: need at least 8 radial nodes");
  const double L = manifold.length();
  if (!(spec.x_min > 0.0) || !(spec.x_min < 0.05 * L))
    throw std::invalid_argument("x_min must lie in (0, 0.05 L)");

  auto g = std::make_shared<Grid>();
  g->manifold = manifold;
  g->spec = spec;
  RadialGrid& r = g->radial;
  r.topology = manifold.topology;
  r.length = L;
  r.size = N;

  if (manifold.topology == ConeManifold::Topology::suspension) {
    // innermost node s_lo + h/2 lands on x_min; symmetric interval [-S, S]
    r.map_scale = L;
    const double s1 = std::log(spec.x_min / (L - spec.x_min));
    const double S = -s1 / (1.0 - 1.0 / N);
    r.s_lower = -S;
    r.s_upper = S;
  } else {
    const double b = spec.body_transition;
    r.map_scale = L / softplus(b);
    const double s1 = std::log(std::expm1(spec.x_min / r.map_scale));
    r.s_lower = (s1 - b / (2.0 * N)) / (1.0 - 1.0 / (2.0 * N));
    r.s_upper = b;
  }
  r.step = (r.s_upper - r.s_lower) / N;

  r.s.resize(N);
  r.x.resize(N);
  r.x_right.resize(N);
  r.dxds.resize(N);
  for (int i = 0; i < N; ++i) {
    r.s[i] = r.s_lower + (i + 0.5) * r.step;
    r.map(r.s[i], r.x[i], r.x_right[i], r.dxds[i]);
  }
  r.s_face.resize(N + 1);
  r.x_face.resize(N + 1);
  r.x_right_face.resize(N + 1);
  r.dxds_face.resize(N + 1);
  for (int f = 0; f <= N; ++f) {
    r.s_face[f] = r.s_lower + f * r.step;
    r.map(r.s_face[f], r.x_face[f], r.x_right_face[f], r.dxds_face[f]);
  }
  if (manifold.topology == ConeManifold::Topology::capped_cone) {
    r.x_face[N] = L;
    r.x_right_face[N] = 0.0;
  }

  g->angular = make_angular_basis(manifold.cross_section, spec.angular_nodes);

  const int n = manifold.n();
  g->phi.resize(N);
  g->phi_face.resize(N + 1);
  g->volume_density.resize(N);
  for (int i = 0; i < N; ++i) {
    g->phi[i] = manifold.warp.value(r.x[i], r.x_right[i]);
    g->volume_density[i] = std::pow(g->phi[i], n) * r.dxds[i];
  }
  for (int f = 0; f <= N; ++f) g->phi_face[f] = manifold.warp.value(r.x_face[f], r.x_right_face[f]);

  g->mean_volume_density = g->volume_density;
  g->tip_ball[0] = tip_ball_volume(manifold.warp, r.x_face[0], n);
  g->mean_volume_density[0] += g->tip_ball[0] / r.step;
  if (manifold.topology == ConeManifold::Topology::suspension) {
    g->tip_ball[1] = tip_ball_volume(manifold.warp, r.x_right_face[N], n);
    g->mean_volume_density[N - 1] += g->tip_ball[1] / r.step;
  }
  return g;
}

}  // namespace conepme
