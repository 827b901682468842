#include <Eigen/Dense>
#include <cmath>

#include "conepme/evolution.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conepme;
using testing_support::capped_grid;
using testing_support::positive_field;
using testing_support::suspension_grid;

namespace {

// One implicit Euler heat step, mode by mode, with dense matrices.
Field dense_heat_step(const Laplacian& lap, const Field& u, double dt) {
  const Grid& g = lap.grid();
  const int N = g.N();
  const int K = g.K();
  Eigen::MatrixXd basis(K, K);  // values = coeffs * basis
  for (int b = 0; b < K; ++b)
    for (int k = 0; k < K; ++k) basis(b, k) = g.angular.value(b, k);
  Eigen::MatrixXd vals(N, K);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) vals(i, k) = u(i, k);
  Eigen::MatrixXd coeffs = basis.transpose().fullPivLu().solve(vals.transpose()).transpose();
  for (int b = 0; b < K; ++b) {
    const auto& op = lap.mode_for_basis(b);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N);
    for (int i = 0; i < N; ++i) {
      A(i, i) -= dt * (op.reaction[i] - op.lower[i] - op.upper[i]);
      if (i > 0) A(i, i - 1) -= dt * op.lower[i];
      if (i + 1 < N) A(i, i + 1) -= dt * op.upper[i];
    }
    coeffs.col(b) = A.fullPivLu().solve(Eigen::VectorXd(coeffs.col(b)));
  }
  const Eigen::MatrixXd out = coeffs * basis;
  Field f(lap.grid_ptr());
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < K; ++k) f(i, k) = out(i, k);
  return f;
}

SolveControls quick(double m, double T) {
  SolveControls c;
  c.m = m;
  c.T = T;
  c.frame_interval = T / 4.0;
  c.dt_max = T / 4.0;
  return c;
}

}  // namespace

TEST_CASE("controls are checked") {
  SolveControls c;
  CHECK_NOTHROW(c.check());
  c.m = 0.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = SolveControls{};
  c.dt_min = 1.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = SolveControls{};
  c.max_sweeps = 0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
}

TEST_CASE("constants do not move under a step") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  for (double m : {0.5, 1.0, 2.0, 3.0}) {
    SolveControls c = quick(m, 1.0);
    const Field w(g, 1.7);
    CHECK(max_abs_difference(step(lap, w, 0.1, c), w) <= 1e-14);
    c.newton = true;
    CHECK(max_abs_difference(step(lap, w, 0.1, c), w) <= 1e-14);
  }
}

TEST_CASE("heat step equals the dense mode-wise solve") {
  for (auto g : {suspension_grid(0.8, 48, 12), capped_grid(1.0, 48, 12)}) {
    Laplacian lap(g);
    const Field u = positive_field(g, 3, 1.0, 2.0);
    for (double dt : {1e-4, 1e-2, 0.5}) {
      SolveControls c = quick(1.0, 1.0);
      const Field a = step(lap, u, dt, c);
      const Field b = dense_heat_step(lap, u, dt);
      CHECK(max_abs_difference(a, b) <= 1e-12 * b.max_abs());
    }
  }
}

TEST_CASE("lagged and Newton sweeps reach the same step") {
  auto g = suspension_grid(0.8, 48, 16);
  Laplacian lap(g);
  const Field u = positive_field(g, 5, 1.0, 2.0);
  for (double m : {2.0, 3.0}) {
    SolveControls c = quick(m, 1.0);
    const StepResult a = implicit_step(lap, u, 0.05, c);
    c.newton = true;
    const StepResult b = implicit_step(lap, u, 0.05, c);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    CHECK(max_abs_difference(a.u, b.u) <= 1e-9);
    CHECK(b.sweeps <= a.sweeps);
    // the step conserves mass exactly
    CHECK(std::abs(mass(lap, a.u) - mass(lap, u)) <= 1e-13 * mass(lap, u));
    CHECK(std::abs(mass(lap, b.u) - mass(lap, u)) <= 1e-13 * mass(lap, u));
  }
}

TEST_CASE("implicit step against a fine explicit oracle") {
  auto g = make_grid(ConeManifold::suspension(CrossSection::circle(0.8)), {64, 16, 0.02, 2.0});
  Laplacian lap(g);
  const Field u = positive_field(g, 7, 1.0, 2.0, 2);
  const double m = 2.0;
  const Field w = u.map([m](double v) { return std::pow(v, m); });
  const Field a = w.map([m](double v) { return m * std::pow(v, (m - 1.0) / m); });
  auto flow = [&](const Field& f) {
    Field out = lap.apply(f);
    for (std::size_t j = 0; j < out.values().size(); ++j) out.values()[j] *= a.values()[j];
    return out;
  };
  // second time derivative with the coefficient frozen
  const double wtt = flow(flow(w)).max_abs();
  const double bound = explicit_stability_bound(lap, w, m);
  auto local_error = [&](double dt) {
    SolveControls c = quick(m, dt);
    c.frame_interval = dt;
    c.dt_max = c.dt_init = dt;
    c.dt_min = 1e-6 * dt;
    const Field w_imp = step(lap, w, dt, c);
    const Trajectory ref = explicit_reference(lap, u, c, dt / 1000.0);
    REQUIRE(ref.completed);
    return max_abs_difference(w_imp, ref.frames.back().w);
  };
  const double dt = 0.5 * bound;
  const double e1 = local_error(dt);
  const double e2 = local_error(0.5 * dt);
  CHECK(e1 < 10.0 * dt * dt * wtt);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("solve keeps constants") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  const Trajectory tr = solve(lap, Field(g, 2.0), quick(3.0, 1.0));
  REQUIRE(tr.completed);
  CHECK(tr.frames.size() == 5);
  for (const auto& f : tr.frames) CHECK(max_abs_difference(f.u, Field(g, 2.0)) < 1e-12);
}

TEST_CASE("mass, bounds and u/w consistency") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  const Field u0 = positive_field(g, 11, 1.0, 2.0);
  for (double m : {1.0, 2.0, 3.0}) {
    for (bool newton : {false, true}) {
      SolveControls c = quick(m, 0.2);
      c.newton = newton;
      const Trajectory tr = solve(lap, u0, c);
      REQUIRE(tr.completed);
      const double m0 = mass(lap, u0);
      double prev_max = u0.max();
      double prev_min = u0.min();
      for (const auto& f : tr.frames) {
        CHECK(std::abs(f.diag.mass - m0) <= 1e-8 * m0);
        CHECK(f.diag.min >= 1.0 - 1e-8);
        CHECK(f.diag.max <= 2.0 + 1e-8);
        CHECK(f.diag.max <= prev_max + 1e-12);
        CHECK(f.diag.min >= prev_min - 1e-12);
        prev_max = f.diag.max;
        prev_min = f.diag.min;
        const Field wm = f.u.map([m](double v) { return std::pow(v, m); });
        CHECK(max_abs_difference(wm, f.w) <= 1e-12 * f.w.max_abs());
      }
      for (std::size_t k = 1; k < tr.frames.size(); ++k) CHECK(tr.frames[k].t > tr.frames[k - 1].t);
    }
  }
}

TEST_CASE("frames land on requested times") {
  auto g = capped_grid(1.0, 48, 8);
  Laplacian lap(g);
  SolveControls c = quick(2.0, 0.3);
  c.frame_interval = 0.1;
  c.output_times = {0.001, 0.05, 0.1};
  const Trajectory tr = solve(lap, positive_field(g, 1, 1.0, 2.0), c);
  REQUIRE(tr.completed);
  const std::vector<double> expect{0.0, 0.001, 0.05, 0.1, 0.2, 0.3};
  REQUIRE(tr.frames.size() == expect.size());
  for (std::size_t k = 0; k < expect.size(); ++k) CHECK(tr.frames[k].t == doctest::Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("step size underflow aborts with a partial trajectory") {
  auto g = suspension_grid(0.8, 48, 16);
  Laplacian lap(g);
  SolveControls c = quick(2.0, 1.0);
  c.tolerance = 1e-15;
  c.dt_min = 1e-3;
  c.dt_init = 1e-2;
  const Trajectory tr = solve(lap, positive_field(g, 2, 1.0, 2.0), c);
  CHECK_FALSE(tr.completed);
  CHECK(tr.failure.find("underflow") != std::string::npos);
  CHECK(tr.frames.size() >= 1);
  CHECK_THROWS_AS(solve(lap, Field(g, 0.0), c), std::invalid_argument);
}

TEST_CASE("explicit reference") {
  auto g = make_grid(ConeManifold::suspension(CrossSection::circle(0.8)), {32, 8, 0.02, 2.0});
  Laplacian lap(g);
  SolveControls c = quick(2.0, 0.002);
  const Field u0 = positive_field(g, 4, 1.0, 2.0, 2);
  const double bound = explicit_stability_bound(lap, u0.map([](double v) { return v * v; }), 2.0);
  CHECK_THROWS_AS(explicit_reference(lap, u0, c, 2.0 * bound), std::invalid_argument);

  const Trajectory flat = explicit_reference(lap, Field(g, 1.5), c, 0.5 * bound);
  CHECK(max_abs_difference(flat.frames.back().u, Field(g, 1.5)) <= 1e-14);

  // first-order self-convergence against the Richardson limit
  const double dt = 0.5 * bound;
  const Field a = explicit_reference(lap, u0, c, dt).frames.back().u;
  const Field b = explicit_reference(lap, u0, c, dt / 2).frames.back().u;
  const Field d = explicit_reference(lap, u0, c, dt / 4).frames.back().u;
  const Field limit = 2.0 * d - b;
  const double e1 = max_abs_difference(a, limit);
  const double e2 = max_abs_difference(b, limit);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("implicit solve against the explicit oracle at T = 0.01") {
  auto g = make_grid(ConeManifold::suspension(CrossSection::circle(0.8)), {64, 16, 0.02, 2.0});
  Laplacian lap(g);
  const Field u0 = positive_field(g, 9, 1.0, 2.0, 2);
  SolveControls c = quick(2.0, 0.01);
  c.tolerance = 1e-7;
  const Trajectory imp = solve(lap, u0, c);
  const double bound = explicit_stability_bound(lap, u0.map([](double v) { return v * v; }), 2.0);
  const Trajectory ref = explicit_reference(lap, u0, c, 0.5 * bound);
  REQUIRE(imp.completed);
  REQUIRE(ref.completed);
  const Field& a = imp.frames.back().u;
  const Field& b = ref.frames.back().u;
  CHECK(max_abs_difference(a, b) / b.max_abs() < 1e-3);
}

TEST_CASE("mass and modal energies") {
  auto g = suspension_grid(1.0, 64, 16);
  Laplacian lap(g);
  CHECK(mass(lap, Field(g)) == 0.0);
  const Field f = positive_field(g, 1, 1.0, 2.0);
  const Field h = positive_field(g, 2, -1.0, 1.0);
  CHECK(mass(lap, 2.0 * f + (-3.0) * h) ==
        doctest::Approx(2.0 * mass(lap, f) - 3.0 * mass(lap, h)).epsilon(1e-12));
  // modal energies add up to the L2 energy
  const auto e = modal_energies(lap, f);
  double total = 0.0;
  for (double v : e) total += v;
  CHECK(total == doctest::Approx(lap.inner(f, f)).epsilon(1e-12));
  const auto flat = modal_energies(lap, Field(g, 3.0));
  for (std::size_t j = 1; j < flat.size(); ++j) CHECK(flat[j] == 0.0);
}
