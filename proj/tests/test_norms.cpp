#include <cmath>
#include <numbers>
#include <random>

#include "conepme/norms.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conepme;
using testing_support::capped_grid;
using testing_support::smooth_field;
using testing_support::suspension_grid;

namespace {

Field planted(const std::shared_ptr<const Grid>& g, double base, double beta) {
  return Field::sample(g, [=](double x, double, double th) { return base + std::pow(x, beta) * std::cos(th); });
}

}  // namespace

TEST_CASE("mellin norm basics") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  for (int s : {0, 1, 2}) {
    CHECK(mellin_norm(lap, Field(g), {s, -0.5, 2.0, 0.0}) == 0.0);
    const Field f = smooth_field(g, 3, 3, 1.0);
    const double a = mellin_norm(lap, f, {s, -0.5, 3.0, 0.0});
    CHECK(mellin_norm(lap, 2.0 * f, {s, -0.5, 3.0, 0.0}) == doctest::Approx(2.0 * a).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mellin_norm(lap, Field(g), {3, -0.5, 2.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(mellin_norm(lap, Field(g), {0, -0.5, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(mellin_norm(lap, Field(g), {0, -0.5, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("mellin norm of a power matches the one-dimensional integral") {
  // flat cone of radius 1, whole manifold taken as collar:
  // ||x^b||^p = 2 pi int_0^1 x^{(b + 1 - gamma) p} dx / x
  auto g = capped_grid(1.0, 512, 8);
  Laplacian lap(g);
  for (double beta : {0.0, 0.5, 1.3}) {
    for (double p : {2.0, 3.0}) {
      const double gamma = -0.5;
      const Field f = Field::sample(g, [beta](double x, double, double) { return std::pow(x, beta); });
      const double e = (beta + 1.0 - gamma) * p;
      const double exact = std::pow(2.0 * std::numbers::pi / e, 1.0 / p);
      CHECK(mellin_norm(lap, f, {0, gamma, p, 1.0}) == doctest::Approx(exact).epsilon(1e-4));
      // (x d_x) x^b = b x^b
      const double exact1 = std::pow((1.0 + std::pow(beta, p)) * 2.0 * std::numbers::pi / e, 1.0 / p);
      CHECK(mellin_norm(lap, f, {1, gamma, p, 1.0}) == doctest::Approx(exact1).epsilon(1e-3));
    }
  }
}

TEST_CASE("mellin norm triangle inequality") {
  auto g = suspension_grid(0.8, 64, 16);
  Laplacian lap(g);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Field f = smooth_field(g, 2 * seed, 3, 0.5);
    const Field h = smooth_field(g, 2 * seed + 1, 3, -0.2);
    for (int s : {0, 1, 2}) {
      const NormSpec spec{s, -0.5, 4.0, 0.0};
      const double lhs = mellin_norm(lap, f + h, spec);
      CHECK(lhs <= (1.0 + 1e-10) * (mellin_norm(lap, f, spec) + mellin_norm(lap, h, spec)));
    }
  }
}

TEST_CASE("pointwise bound by the s = 2 norm") {
  // sup_collar |f| x^{(n+1)/2 - mu} <= C ||f||_{2, mu}, C calibrated on the coarsest grid
  const double mu = -0.5;
  auto ratio = [mu](int N, std::uint64_t seed) {
    auto g = capped_grid(0.8, N, 16);
    Laplacian lap(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), expo(0.2, 2.0);
    double a[4], b[4];
    for (int j = 0; j < 4; ++j) {
      a[j] = amp(rng);
      b[j] = expo(rng);
    }
    const double collar = g->manifold.collar_length;
    const Field f = Field::sample(g, [&](double x, double, double th) {
      double v = 0.0;
      for (int j = 0; j < 4; ++j) v += a[j] * std::pow(x, b[j]) * std::cos(j * th);
      return collar_cutoff(x, collar) * v;
    });
    double sup = 0.0;
    for (int i = 0; i < g->N() && g->radial.x[i] <= collar; ++i)
      for (int k = 0; k < g->K(); ++k) sup = std::max(sup, std::abs(f(i, k)) * std::pow(g->radial.x[i], 1.0 - mu));
    return sup / mellin_norm(lap, f, {2, mu, 2.0, 0.0});
  };
  double C = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) C = std::max(C, ratio(128, s));
  C *= 1.5;
  for (int N : {256, 512})
    for (std::uint64_t s = 100; s < 104; ++s) CHECK(ratio(N, s) <= C);
}

TEST_CASE("E0 split") {
  auto g = capped_grid(0.8, 256, 16);
  SUBCASE("constant") {
    auto gs = suspension_grid(1.0, 64, 8);
    const auto sp = split_E0(Field(gs, 5.0));
    REQUIRE(sp.constants.size() == 2);
    CHECK(sp.constants[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(sp.constants[1] == doctest::Approx(5.0).epsilon(1e-14));
    // the cutoff is 1 near the tips and the remainder vanishes there
    for (int i = 0; i < 5; ++i) CHECK(std::abs(sp.remainder(i, 0)) < 1e-13);
  }
  SUBCASE("constant plus decaying mode") {
    const Field f = planted(g, 3.0, 1.25);
    const auto sp = split_E0(f);
    CHECK(std::abs(sp.constants[0] - 3.0) <= 1e-6);
    CHECK_FALSE(sp.diverged[0]);
    double worst = 0.0;
    for (int i = 0; i < g->N() && g->radial.x[i] < 0.5 * g->manifold.collar_length; ++i)
      for (int k = 0; k < g->K(); ++k)
        worst = std::max(worst, std::abs(sp.remainder(i, k) - std::pow(g->radial.x[i], 1.25) * std::cos(g->angular.nodes[k])));
    CHECK(worst <= 1e-6);
    CHECK(std::abs(sp.remainder.tip_limit(0)) <= 1e-6 * f.max_abs());
    // re-adding the cutoff constants restores f
    Field back = sp.remainder;
    for (int i = 0; i < g->N(); ++i)
      for (int k = 0; k < g->K(); ++k)
        back(i, k) += collar_cutoff(g->radial.x[i], g->manifold.collar_length) * sp.constants[0];
    CHECK(max_abs_difference(back, f) <= 1e-12);
  }
  SUBCASE("pure mode one") {
    const auto sp = split_E0(planted(g, 0.0, 1.25));
    CHECK(std::abs(sp.constants[0]) <= 1e-12);
  }
  SUBCASE("blow-up profile is flagged") {
    const Field f = Field::sample(g, [](double x, double, double) { return std::log(x); });
    const auto sp = split_E0(f);
    CHECK(sp.diverged[0]);
    CHECK(sp.constants[0] == doctest::Approx(f.ring_mean(0)));
  }
}

TEST_CASE("tip decay rate recovers planted exponents") {
  auto g = capped_grid(0.8, 512, 16);
  for (double beta : {0.5, 1.0, 1.25, 1.8}) {
    const auto te = tip_decay_rate(planted(g, 3.0, beta), 0);
    CAPTURE(beta);
    CHECK(std::abs(te.exponent - beta) <= 0.03);
    CHECK(te.constant == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(te.points > 10);
  }
  const auto te = tip_decay_rate(planted(capped_grid(0.8, 256, 16), 3.0, 1.25), 0);
  CHECK(std::abs(te.exponent - 1.25) <= 0.02);

  auto gs = suspension_grid(0.8, 256, 16);
  const auto flat = tip_decay_rate(Field(gs, 2.0), 1);
  CHECK(flat.flat);
  CHECK(std::isnan(flat.exponent));
  CHECK_THROWS_AS(tip_decay_rate(Field(gs, 2.0), 2), std::invalid_argument);
}

TEST_CASE("holder estimate") {
  auto g = capped_grid(1.0, 128, 16);
  std::vector<double> times;
  for (int f = 0; f < 10; ++f) times.push_back(0.1 * (f + 1));

  SUBCASE("constant trajectory") {
    std::vector<Field> frames(10, Field(g, 2.0));
    const auto h = holder_estimate(frames, times);
    CHECK(h.degenerate);
  }
  SUBCASE("smooth trajectory saturates") {
    std::vector<Field> frames;
    for (double t : times)
      frames.push_back(Field::sample(g, [t](double x, double, double th) {
        return 2.0 + std::exp(-t) * (x * x * (1.0 - 2.0 * x / 3.0) + 0.3 * x * std::cos(th));
      }));
    const auto h = holder_estimate(frames, times);
    CHECK_FALSE(h.degenerate);
    CHECK(h.space >= 1.0);
    CHECK(h.space_saturated);
    CHECK(h.time >= 0.9);
  }
  SUBCASE("square-root profile") {
    // sqrt(|x - 1/2|) is exactly 1/2-Hölder
    std::vector<Field> frames;
    for (double t : times)
      frames.push_back(Field::sample(g, [t](double x, double, double) { return (1.0 + t) * std::sqrt(std::abs(x - 0.5)); }));
    const auto h = holder_estimate(frames, times);
    CHECK(h.space == doctest::Approx(0.5).epsilon(0.2));
    CHECK_FALSE(h.space_saturated);
  }
  CHECK_THROWS_AS(holder_estimate(std::vector<Field>(3, Field(g)), {0.0, 1.0, 2.0}), std::invalid_argument);
}
