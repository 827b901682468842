#include <cmath>
#include <numbers>
#include <sstream>

#include "conepme/laplacian.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conepme;
using testing_support::capped_grid;
using testing_support::smooth_field;
using testing_support::suspension_grid;

namespace {

// max over collar nodes of |x^2 (L_j u)_i| / max |u| for u = x^q on a straight collar
double indicial_residual(int N, double c, int mode) {
  auto g = capped_grid(c, N, 16, 1.0, 1e-5);
  Laplacian lap(g);
  const auto& op = lap.modes()[mode];
  const double q = decay_exponent(g->n(), op.lambda);
  std::vector<double> u(N), out(N);
  for (int i = 0; i < N; ++i) u[i] = std::pow(g->radial.x[i], q);
  op.apply(u, out);
  double res = 0.0;
  double norm = 0.0;
  for (int i = 0; i < N; ++i) {
    if (g->radial.x[i] > g->manifold.collar_length) break;
    res = std::max(res, std::abs(g->radial.x[i] * g->radial.x[i] * out[i]));
    norm = std::max(norm, std::abs(u[i]));
  }
  return res / norm;
}

}  // namespace

TEST_CASE("grid layout") {
  auto g = suspension_grid(1.0, 64, 16);
  CHECK(g->radial.x[0] == doctest::Approx(1e-5).epsilon(1e-10));
  CHECK(g->radial.x_right[63] == doctest::Approx(1e-5).epsilon(1e-10));
  for (int i = 1; i < 64; ++i) CHECK(g->radial.x[i] > g->radial.x[i - 1]);
  // geometric grading near the tip
  const double r0 = g->radial.x[1] / g->radial.x[0];
  const double r1 = g->radial.x[2] / g->radial.x[1];
  CHECK(r0 == doctest::Approx(r1).epsilon(1e-4));

  auto cap = capped_grid(1.0, 64, 16);
  CHECK(cap->radial.x[0] == doctest::Approx(1e-5).epsilon(1e-10));
  CHECK(cap->radial.x_face[64] == 1.0);

  CHECK_THROWS_AS(make_grid(g->manifold, {4, 16, 1e-5, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(g->manifold, {64, 15, 1e-5, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_mode_operators(*g, 100), std::invalid_argument);
}

TEST_CASE("transform round trip is the identity") {
  for (auto g : {suspension_grid(0.8, 32, 16),
                 make_grid(ConeManifold::suspension(CrossSection::sphere(2)), {32, 12, 1e-5, 2.0}),
                 make_grid(ConeManifold::suspension(CrossSection::sphere(3)), {32, 9, 1e-5, 2.0})}) {
    Laplacian lap(g);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (double& v : f.values()) v = u(rng);
    const Field back = lap.from_modes(lap.to_modes(f));
    CHECK(max_abs_difference(f, back) < 1e-12);
  }
}

TEST_CASE("sphere basis diagonalizes the angular Laplacian") {
  const auto ab = make_angular_basis(CrossSection::sphere(2), 10);
  // -sum_k w_k grad_b grad_b' = lambda_b N_b delta_bb'
  for (int b = 0; b < 10; ++b)
    for (int bp = 0; bp < 10; ++bp) {
      double s = 0.0;
      for (int k = 0; k < 10; ++k) s += ab.weights[k] * ab.grad(b, k) * ab.grad(bp, k);
      const double expect = b == bp ? -cross_section_eigenvalue(ab.cross_section, b) * ab.norms[b] : 0.0;
      CHECK(std::abs(s - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
  double total = 0.0;
  for (double w : ab.weights) total += w;
  CHECK(total == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("constants are harmonic") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  const Field one(g, 3.0);
  CHECK(lap.apply(one).max_abs() <= 1e-12);
  const auto& op0 = lap.modes()[0];
  for (int i = 0; i < g->N(); ++i) CHECK(std::abs(op0.lower[i] + op0.diag[i] + op0.upper[i]) <= 1e-12 * std::abs(op0.diag[i]));
}

TEST_CASE("x^2 through the mode-0 operator on the flat cone is 4") {
  auto g = capped_grid(1.0, 256, 8);
  Laplacian lap(g);
  std::vector<double> u(g->N()), out(g->N());
  for (int i = 0; i < g->N(); ++i) u[i] = g->radial.x[i] * g->radial.x[i];
  lap.modes()[0].apply(u, out);
  double worst = 0.0;
  for (int i = 0; i < g->N() && g->radial.x[i] < g->manifold.collar_length; ++i)
    worst = std::max(worst, std::abs(out[i] - 4.0));
  CHECK(worst < 2e-2);
}

TEST_CASE("indicial annihilation converges at second order") {
  for (double c : {1.0, 0.8}) {
    const double e128 = indicial_residual(128, c, 1);
    const double e256 = indicial_residual(256, c, 1);
    const double e512 = indicial_residual(512, c, 1);
    CAPTURE(c);
    CAPTURE(e128);
    CAPTURE(e256);
    CAPTURE(e512);
    CHECK(e256 < 1e-3);
    CHECK(e128 / e256 >= 3.5);
    CHECK(e256 / e512 >= 3.5);
  }
  // higher mode, and the sphere cross-section with n = 2
  CHECK(indicial_residual(256, 1.0, 3) / indicial_residual(512, 1.0, 3) >= 3.5);
  {
    auto resid = [](int N) {
      auto g = make_grid(ConeManifold::capped(CrossSection::sphere(2), 1.0), {N, 6, 1e-5, 2.0});
      Laplacian lap(g);
      const auto& op = lap.modes()[1];
      const double q = decay_exponent(2, op.lambda);
      std::vector<double> u(N), out(N);
      for (int i = 0; i < N; ++i) u[i] = std::pow(g->radial.x[i], q);
      op.apply(u, out);
      double r = 0.0;
      for (int i = 0; i < N && g->radial.x[i] < 0.5; ++i) r = std::max(r, std::abs(g->radial.x[i] * g->radial.x[i] * out[i]));
      return r;
    };
    CHECK(resid(256) / resid(512) >= 3.5);
  }
}

TEST_CASE("indicial annihilation in physical space") {
  auto residual = [](int N) {
    auto g = capped_grid(0.8, N, 16);
    Laplacian lap(g);
    const double q = 1.0 / 0.8;
    const Field f = Field::sample(g, [q](double x, double, double th) { return std::pow(x, q) * std::cos(th); });
    const Field out = lap.apply(f);
    double r = 0.0;
    for (int i = 0; i < N && g->radial.x[i] < g->manifold.collar_length; ++i)
      for (int k = 0; k < g->K(); ++k) r = std::max(r, std::abs(g->radial.x[i] * g->radial.x[i] * out(i, k)));
    return r;
  };
  const double a = residual(128);
  const double b = residual(256);
  CHECK(b < 1e-3);
  CHECK(a / b >= 3.5);
}

TEST_CASE("linearity") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  const Field f = smooth_field(g, 1);
  const Field h = smooth_field(g, 2);
  const Field lhs = lap.apply(2.5 * f + (-1.5) * h);
  const Field rhs = 2.5 * lap.apply(f) + (-1.5) * lap.apply(h);
  // rounding near a tip is amplified by 1/x^2; compare x^2 * L (the b-operator)
  double worst = 0.0;
  for (int i = 0; i < g->N(); ++i) {
    const double x = std::min(g->radial.x[i], g->radial.x_right[i]);
    for (int k = 0; k < g->K(); ++k) worst = std::max(worst, x * x * std::abs(lhs(i, k) - rhs(i, k)));
  }
  CHECK(worst <= 1e-12 * (2.5 * f.max_abs() + 1.5 * h.max_abs()));
}

TEST_CASE("discrete self-adjointness and semi-definiteness") {
  for (auto g : {suspension_grid(0.8, 64, 16), suspension_grid(1.0, 96, 24), capped_grid(1.3, 64, 16),
                 make_grid(ConeManifold::suspension(CrossSection::sphere(2)), {64, 10, 1e-5, 2.0})}) {
    Laplacian lap(g);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      Field f(g), h(g);
      for (double& v : f.values()) v = u(rng);
      for (double& v : h.values()) v = u(rng);
      const double a = lap.inner(lap.apply(f), h);
      const double b = lap.inner(f, lap.apply(h));
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)));
      CHECK(lap.inner(lap.apply(f), f) <= 1e-10 * lap.inner(f, f));
      // summation by parts: Dirichlet form equals -<f, L h>
      const double d = lap.gradient_inner(f, h);
      CHECK(std::abs(d + b) <= 1e-10 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("mass of the unit field is the volume") {
  auto g = suspension_grid(1.0, 128, 8);
  Laplacian lap(g);
  CHECK(lap.integral(Field(g, 1.0)) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-8));
  auto g2 = make_grid(ConeManifold::suspension(CrossSection::sphere(2)), {128, 6, 1e-5, 2.0});
  Laplacian lap2(g2);
  CHECK(lap2.integral(Field(g2, 1.0)) == doctest::Approx(g2->manifold.volume()).epsilon(1e-8));
  auto gc = capped_grid(0.8, 128, 8);
  Laplacian lapc(gc);
  // the capped map is only second order at the outer face
  CHECK(lapc.integral(Field(gc, 1.0)) == doctest::Approx(gc->manifold.volume()).epsilon(1e-3));
}

TEST_CASE("laplacian images integrate to zero") {
  auto g = suspension_grid(0.8, 128, 32);
  Laplacian lap(g);
  const Field f = smooth_field(g, 4, 3, 2.0);
  const Field lf = lap.apply(f);
  CHECK(std::abs(lap.integral(lf)) <= 1e-10 * lap.integral(lf.map([](double v) { return std::abs(v); })));
}

TEST_CASE("divergence form") {
  auto g = suspension_grid(0.8, 128, 32);
  Laplacian lap(g);
  SUBCASE("constants") {
    for (double m : {0.5, 1.0, 2.0, 3.0}) CHECK(divergence_form_apply(lap, Field(g, 1.7), m).max_abs() <= 1e-12);
  }
  SUBCASE("m = 1 matches the mode-wise operator") {
    const Field f = smooth_field(g, 5, 3, 2.0);
    const Field a = divergence_form_apply(lap, f, 1.0);
    const Field b = lap.apply(f);
    const Field d = a - b;
    CHECK(std::sqrt(lap.inner(d, d)) <= 1e-6 * std::sqrt(lap.inner(b, b)));
  }
  SUBCASE("discrete Green identity") {
    for (double m : {1.0, 2.0, 3.0}) {
      const Field f = smooth_field(g, 6, 3, 2.0);
      const Field out = divergence_form_apply(lap, f, m);
      const double scale = lap.integral(out.map([](double v) { return std::abs(v); }));
      CHECK(std::abs(lap.integral(out)) <= 1e-10 * scale);
    }
  }
  SUBCASE("agrees with the Laplacian of u^m") {
    // the two routes differ by discretization only
    const Field f = smooth_field(g, 7, 2, 2.0);
    const Field a = divergence_form_apply(lap, f, 2.0);
    const Field b = lap.apply(f.map([](double v) { return v * v; }));
    double worst = 0.0;
    for (int i = 0; i < g->N(); ++i)
      if (g->radial.x[i] > 0.2 && g->radial.x_right[i] > 0.2)
        for (int k = 0; k < g->K(); ++k) worst = std::max(worst, std::abs(a(i, k) - b(i, k)));
    CHECK(worst <= 2e-2 * b.max_abs());
  }
  SUBCASE("domain errors") {
    Field f = smooth_field(g, 8, 2, 0.0);
    CHECK_THROWS_AS(divergence_form_apply(lap, f, 0.5), std::domain_error);
    CHECK_THROWS_AS(divergence_form_apply(lap, f, 1.5), std::domain_error);
  }
}

TEST_CASE("field serialization round trip") {
  auto g = suspension_grid(0.8, 16, 8);
  const Field f = smooth_field(g, 9, 2, 1.0);
  {
    std::stringstream ss;
    write_field_binary(ss, f);
    const Field back = bind_field(read_field_binary(ss), g);
    CHECK(max_abs_difference(f, back) == 0.0);
    CHECK(back.tip_values() == f.tip_values());
  }
  {
    std::stringstream ss;
    write_field_csv(ss, f);
    const Field back = bind_field(read_field_csv(ss), g);
    CHECK(max_abs_difference(f, back) <= 1e-15 * f.max_abs());
  }
  auto other = suspension_grid(0.8, 32, 8);
  std::stringstream ss;
  write_field_binary(ss, f);
  CHECK_THROWS_AS(bind_field(read_field_binary(ss), other), std::invalid_argument);
  std::stringstream junk("not a field");
  CHECK_THROWS(read_field_binary(junk));
}
