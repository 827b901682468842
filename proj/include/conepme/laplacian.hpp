#pragma once

// Discrete cone Laplacian. Spectral in the cross-section, conservative
// finite differences in the computational coordinate s:
//
//   (L_j u)_i = [c_{i+1/2}(u_{i+1} - u_i) - c_{i-1/2}(u_i - u_{i-1})] / (h^2 V_i)
//               + lambda_j u_i / phi_i^2,
//   c_f = phi_f^n / X'(s_f),   V_i = phi_i^n X'(s_i).
//
// Mode 0 closes with zero flux at the tip face, modes j >= 1 with a ghost
// node following the bounded indicial solution x^{-q_j^-}; the outer face of
// a capped cone has zero flux for every mode.

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "conepme/field.hpp"
#include "conepme/geometry.hpp"
#include "conepme/grid.hpp"

namespace conepme {

enum class TipClosure { regularity, indicial_decay };

struct ModeOperator {
  int mode = 0;
  double lambda = 0.0;
  TipClosure closure = TipClosure::regularity;
  // Ghost-node ratios x_ghost^q / x_first^q at tip 0 and tip 1 (1 for mode 0).
  double ghost_ratio[2] = {1.0, 1.0};
  std::vector<double> lower, diag, upper;
  // diag minus the off-diagonal row sum: tip closure and lambda_j / phi^2
  std::vector<double> reaction;

  // y = L_j x
  void apply(std::span<const double> in, std::span<double> out, std::size_t stride = 1) const;
};

std::vector<ModeOperator> assemble_mode_operators(const Grid& grid, int mode_count);

// Row-major N x K array of coefficients in the angular basis.
using ModeArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Laplacian {
 public:
  explicit Laplacian(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const std::vector<ModeOperator>& modes() const { return modes_; }
  const ModeOperator& mode_for_basis(int b) const { return modes_[grid_->angular.mode_of[b]]; }

  ModeArray to_modes(const Field& f) const;
  Field from_modes(const ModeArray& c) const;

  Field apply(const Field& f) const;
  void apply_modes(const ModeArray& in, ModeArray& out) const;

  // Solves (shift_i - scale * L_j) y = rhs for every basis column in place;
  // shift is one value per ring.
  void solve_shifted(std::span<const double> shift, double scale, ModeArray& rhs) const;

  // Discrete Dirichlet form  int <grad f, grad g>_g dmu_g ; equals -<f, L g>.
  double gradient_inner(const Field& f, const Field& g) const;

  // Volume-weighted L2 inner product and integral.
  double inner(const Field& f, const Field& g) const;
  double integral(const Field& f) const;

  // Gershgorin bound on the spectral radius of the discrete operator.
  double spectral_radius_bound() const;

  // K x K transform matrices: coefficients = values * forward(), values = coefficients * inverse().
  const Eigen::MatrixXd& forward() const { return forward_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<ModeOperator> modes_;
  Eigen::MatrixXd forward_;  // K x K, coefficients = values * forward_
  Eigen::MatrixXd inverse_;  // K x K, values = coefficients * inverse_
};

// m * Div(u^{m-1} grad u) by flux differencing in physical space. Throws
// std::domain_error for nonpositive u when m < 1 (or negative u for
// non-integer m).
Field divergence_form_apply(const Laplacian& lap, const Field& u, double m);

}  // namespace conepme
