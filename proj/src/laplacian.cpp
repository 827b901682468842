#include "conepme/laplacian.hpp"

#include <cmath>
#include <stdexcept>

namespace conepme {

void ModeOperator::apply(std::span<const double> in, std::span<double> out, std::size_t stride) const {
  const std::size_t N = diag.size();
  for (std::size_t i = 0; i < N; ++i) {
    const double ui = in[i * stride];
    double v = reaction[i] * ui;
    if (i > 0) v += lower[i] * (in[(i - 1) * stride] - ui);
    if (i + 1 < N) v += upper[i] * (in[(i + 1) * stride] - ui);
    out[i * stride] = v;
  }
}

std::vector<ModeOperator> assemble_mode_operators(const Grid& grid, int mode_count) {
  const int N = grid.N();
  if (N < 3) throw std::invalid_argument("grid too coarse for the three-point stencil");
  if (mode_count < 1 || mode_count > grid.angular.mode_count)
    throw std::invalid_argument("mode count exceeds the resolved cross-section spectrum");

  const auto& r = grid.radial;
  const int n = grid.n();
  const double h = r.step;
  std::vector<double> cf(N + 1);
  for (int f = 0; f <= N; ++f) cf[f] = std::pow(grid.phi_face[f], n) / r.dxds_face[f];
  const bool two_tips = grid.manifold.topology == ConeManifold::Topology::suspension;

  std::vector<ModeOperator> ops(mode_count);
  for (int j = 0; j < mode_count; ++j) {
    ModeOperator& op = ops[j];
    op.mode = j;
    op.lambda = cross_section_eigenvalue(grid.manifold.cross_section, j);
    op.closure = j == 0 ? TipClosure::regularity : TipClosure::indicial_decay;
    op.lower.assign(N, 0.0);
    op.diag.assign(N, 0.0);
    op.upper.assign(N, 0.0);
    op.reaction.assign(N, 0.0);

    if (j > 0) {
      const double qp = decay_exponent(n, op.lambda);
      double xg, xrg, dg;
      r.map(r.s[0] - h, xg, xrg, dg);
      op.ghost_ratio[0] = std::pow(xg / r.x[0], qp);
      if (two_tips) {
        r.map(r.s[N - 1] + h, xg, xrg, dg);
        op.ghost_ratio[1] = std::pow(xrg / r.x_right[N - 1], qp);
      }
    }

    const auto& weight = j == 0 ? grid.mean_volume_density : grid.volume_density;
    for (int i = 0; i < N; ++i) {
      const double inv = 1.0 / (h * h * weight[i]);
      double left = cf[i];
      double right = cf[i + 1];
      double d = 0.0;
      if (i == 0) {
        d -= left * (1.0 - op.ghost_ratio[0]) * inv;
        left = 0.0;
      }
      if (i == N - 1) {
        if (two_tips) d -= right * (1.0 - op.ghost_ratio[1]) * inv;
        right = 0.0;
      }
      op.lower[i] = left * inv;
      op.upper[i] = right * inv;
      op.reaction[i] = d + op.lambda / (grid.phi[i] * grid.phi[i]);
      op.diag[i] = op.reaction[i] - op.lower[i] - op.upper[i];
    }
  }
  return ops;
}

Laplacian::Laplacian(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("Laplacian: null grid");
  modes_ = assemble_mode_operators(*grid_, grid_->angular.mode_count);
  const auto& a = grid_->angular;
  const int K = a.size;
  forward_.resize(K, K);
  inverse_.resize(K, K);
  for (int b = 0; b < K; ++b)
    for (int k = 0; k < K; ++k) {
      forward_(k, b) = a.weights[k] * a.value(b, k) / a.norms[b];
      inverse_(b, k) = a.value(b, k);
    }
}

ModeArray Laplacian::to_modes(const Field& f) const {
  const int N = grid_->N();
  const int K = grid_->K();
  Eigen::Map<const ModeArray> v(f.values().data(), N, K);
  // Non-constant modes integrate to zero over the section, so they are taken
  // from values relative to the first node: constants map exactly to mode 0.
  ModeArray shifted = v.colwise() - v.col(0);
  ModeArray c = shifted * forward_;
  c.col(0) = v.col(0) + shifted * forward_.col(0);
  return c;
}

Field Laplacian::from_modes(const ModeArray& c) const {
  Field out(grid_);
  Eigen::Map<ModeArray> v(out.values().data(), grid_->N(), grid_->K());
  v.noalias() = c * inverse_;
  out.refresh_tip_values();
  return out;
}

void Laplacian::apply_modes(const ModeArray& in, ModeArray& out) const {
  const int K = grid_->K();
  out.resize(in.rows(), in.cols());
  for (int b = 0; b < K; ++b) {
    const auto& op = mode_for_basis(b);
    op.apply(std::span<const double>(in.data() + b, in.size()), std::span<double>(out.data() + b, out.size()),
             static_cast<std::size_t>(K));
  }
}

Field Laplacian::apply(const Field& f) const {
  ModeArray out;
  apply_modes(to_modes(f), out);
  return from_modes(out);
}

void Laplacian::solve_shifted(std::span<const double> shift, double scale, ModeArray& rhs) const {
  const int N = grid_->N();
  const int K = grid_->K();
  if (static_cast<int>(shift.size()) != N) throw std::invalid_argument("solve_shifted: shift size");
  std::vector<double> cp(N), dp(N);
  for (int b = 0; b < K; ++b) {
    const auto& op = mode_for_basis(b);
    // Thomas algorithm on (shift - scale * L_j)
    double denom = shift[0] - scale * op.diag[0];
    if (denom == 0.0) throw std::runtime_error("solve_shifted: singular system");
    cp[0] = -scale * op.upper[0] / denom;
    dp[0] = rhs(0, b) / denom;
    for (int i = 1; i < N; ++i) {
      const double a = -scale * op.lower[i];
      denom = shift[i] - scale * op.diag[i] - a * cp[i - 1];
      if (denom == 0.0) throw std::runtime_error("solve_shifted: singular system");
      cp[i] = -scale * op.upper[i] / denom;
      dp[i] = (rhs(i, b) - a * dp[i - 1]) / denom;
    }
    rhs(N - 1, b) = dp[N - 1];
    for (int i = N - 2; i >= 0; --i) rhs(i, b) = dp[i] - cp[i] * rhs(i + 1, b);
  }
}

double Laplacian::gradient_inner(const Field& f, const Field& g) const {
  const auto& grid = *grid_;
  const auto& r = grid.radial;
  const auto& a = grid.angular;
  const int N = grid.N();
  const int K = grid.K();
  const int n = grid.n();
  const double h = r.step;
  const ModeArray cf_ = to_modes(f);
  const ModeArray cg = to_modes(g);
  const bool two_tips = grid.manifold.topology == ConeManifold::Topology::suspension;

  double total = 0.0;
  for (int b = 0; b < K; ++b) {
    const auto& op = mode_for_basis(b);
    double radial = 0.0;
    for (int face = 1; face < N; ++face) {
      const double c = std::pow(grid.phi_face[face], n) / r.dxds_face[face];
      radial += c / h * (cf_(face, b) - cf_(face - 1, b)) * (cg(face, b) - cg(face - 1, b));
    }
    const double c0 = std::pow(grid.phi_face[0], n) / r.dxds_face[0];
    radial += c0 / h * (1.0 - op.ghost_ratio[0]) * cf_(0, b) * cg(0, b);
    if (two_tips) {
      const double cN = std::pow(grid.phi_face[N], n) / r.dxds_face[N];
      radial += cN / h * (1.0 - op.ghost_ratio[1]) * cf_(N - 1, b) * cg(N - 1, b);
    }
    double angular = 0.0;
    for (int i = 0; i < N; ++i)
      angular += h * grid.volume_density[i] / (grid.phi[i] * grid.phi[i]) * cf_(i, b) * cg(i, b);
    total += a.norms[b] * (radial - op.lambda * angular);
  }
  return total;
}

double Laplacian::inner(const Field& f, const Field& g) const {
  const auto& grid = *grid_;
  const auto& a = grid.angular;
  const double measure = a.cross_section.measure();
  const double h = grid.radial.step;
  double s = 0.0;
  for (int i = 0; i < grid.N(); ++i) {
    double ring = 0.0;
    for (int k = 0; k < grid.K(); ++k) ring += a.weights[k] * f(i, k) * g(i, k);
    s += h * grid.volume_density[i] * ring;
    const double extra = grid.mean_volume_density[i] - grid.volume_density[i];
    if (extra != 0.0) s += h * extra * measure * f.ring_mean(i) * g.ring_mean(i);
  }
  return s;
}

double Laplacian::integral(const Field& f) const {
  const auto& grid = *grid_;
  double s = 0.0;
  for (int i = 0; i < grid.N(); ++i) {
    double ring = 0.0;
    for (int k = 0; k < grid.K(); ++k) ring += grid.angular.weights[k] * f(i, k);
    s += grid.mean_volume_density[i] * grid.radial.step * ring;
  }
  return s;
}

double Laplacian::spectral_radius_bound() const {
  double rho = 0.0;
  for (const auto& op : modes_)
    for (std::size_t i = 0; i < op.diag.size(); ++i)
      rho = std::max(rho, std::abs(op.diag[i]) + std::abs(op.lower[i]) + std::abs(op.upper[i]));
  return rho;
}

Field divergence_form_apply(const Laplacian& lap, const Field& u, double m) {
  const bool integer_m = m == std::floor(m);
  if (m < 1.0 && !(u.min() > 0.0)) throw std::domain_error("divergence_form_apply: u must be positive for m < 1");
  if (!integer_m && u.min() < 0.0) throw std::domain_error("divergence_form_apply: u must be nonnegative");

  const auto& grid = lap.grid();
  const auto& r = grid.radial;
  const auto& a = grid.angular;
  const int N = grid.N();
  const int K = grid.K();
  const int n = grid.n();
  const double h = r.step;
  const bool two_tips = grid.manifold.topology == ConeManifold::Topology::suspension;

  const Field coef = u.map([m](double v) { return m * std::pow(v, m - 1.0); });
  Field out(lap.grid_ptr());

  // radial fluxes, arithmetic face average of the coefficient
  std::vector<double> flux(static_cast<std::size_t>(N + 1) * K, 0.0);
  for (int face = 1; face < N; ++face) {
    const double c = std::pow(grid.phi_face[face], n) / r.dxds_face[face];
    for (int k = 0; k < K; ++k) {
      const double af = 0.5 * (coef(face - 1, k) + coef(face, k));
      flux[static_cast<std::size_t>(face) * K + k] = c * af * (u(face, k) - u(face - 1, k)) / h;
    }
  }

  // Tip faces: ghost values follow x^{-q_j^-} mode by mode; the coefficient is
  // frozen to its ring mean so that only non-constant modes carry flux.
  const ModeArray uc = lap.to_modes(u);
  auto tip_flux = [&](int node, int face, int tip, double sign) {
    const double c = std::pow(grid.phi_face[face], n) / r.dxds_face[face];
    const double abar = coef.ring_mean(node);
    for (int k = 0; k < K; ++k) {
      double jump = 0.0;  // u_node - u_ghost
      for (int b = 0; b < K; ++b) jump += (1.0 - lap.mode_for_basis(b).ghost_ratio[tip]) * uc(node, b) * a.value(b, k);
      flux[static_cast<std::size_t>(face) * K + k] = sign * c * abar * jump / h;
    }
  };
  tip_flux(0, 0, 0, 1.0);
  if (two_tips) tip_flux(N - 1, N, 1, -1.0);

  for (int i = 0; i < N; ++i) {
    const double inv = 1.0 / (h * grid.volume_density[i]);
    const double inv_mean = 1.0 / (h * grid.mean_volume_density[i]);
    double mean = 0.0;
    double wsum = 0.0;
    for (int k = 0; k < K; ++k) {
      const double d = flux[static_cast<std::size_t>(i + 1) * K + k] - flux[static_cast<std::size_t>(i) * K + k];
      out(i, k) = d * inv;
      mean += a.weights[k] * d;
      wsum += a.weights[k];
    }
    // the ring mean sees the enlarged tip cell
    mean /= wsum;
    if (inv_mean != inv)
      for (int k = 0; k < K; ++k) out(i, k) += mean * (inv_mean - inv);
  }

  // angular part: weak divergence of coef * grad_theta u
  std::vector<double> g(K), div(K);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < K; ++k) {
      double gk = 0.0;
      for (int b = 0; b < K; ++b) gk += uc(i, b) * a.grad(b, k);
      g[k] = coef(i, k) * gk;
    }
    std::fill(div.begin(), div.end(), 0.0);
    for (int b = 0; b < K; ++b) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += a.weights[k] * g[k] * a.grad(b, k);
      const double coeff = -s / a.norms[b];
      for (int k = 0; k < K; ++k) div[k] += coeff * a.value(b, k);
    }
    const double inv_phi2 = 1.0 / (grid.phi[i] * grid.phi[i]);
    for (int k = 0; k < K; ++k) out(i, k) += div[k] * inv_phi2;
  }
  out.refresh_tip_values();
  return out;
}

}  // namespace conepme
