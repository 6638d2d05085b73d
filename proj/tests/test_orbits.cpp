#include <doctest.h>

#include <cmath>
#include <numbers>

#include "avgkit/orbits.hpp"
#include "avgkit/strobo.hpp"
#include "oracles.hpp"

using namespace avgkit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

IntegratorConfig cfg(int steps = 2048) {
  IntegratorConfig c;
  c.steps_per_period = steps;
  c.period = kTwoPi;
  return c;
}

}  // namespace

TEST_CASE("find_zero on a linear function") {
  const auto f = [](const Vec& z) { return Vec{z[0] - 2.0}; };
  const ZeroResult r = find_zero(f, Vec{1.0});
  CHECK(r.converged);
  CHECK(r.z_star[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.simple);
  CHECK(r.iterations <= 3);
}

TEST_CASE("find_zero flags a double root as non-simple") {
  const auto f = [](const Vec& z) { return Vec{z[0] * z[0]}; };
  const ZeroResult r = find_zero(f, Vec{0.1});
  CHECK(std::abs(r.z_star[0]) < 1e-4);
  CHECK(r.residual_norm < 1e-8);
  CHECK(!r.simple);
}

TEST_CASE("find_zero falls back to bisection when Newton stalls (n = 1)") {
  // saturated sigmoid: the Jacobian at the guess is ~0, Newton overshoots
  // into the flat region and damping cannot reduce the residual
  const auto f = [](const Vec& z) { return Vec{std::tanh(10.0 * (z[0] - 2.0))}; };
  const ZeroResult r = find_zero(f, Vec{-5.0});
  CHECK(r.converged);
  CHECK(r.z_star[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("validate_orbit records per-eps blow-ups without throwing") {
  // x' = eps(1 + x1^2) blows up over a period at eps = 5 but not at 0.01
  const System s =
      make_system(1, kTwoPi, 1, {{parse_expr("1 + x1^2", 1)}});
  const std::vector<double> eps = {5.0, 0.01};
  const OrbitValidation val = validate_orbit(s, Vec{0.0}, eps, cfg());
  REQUIRE(val.ok.size() == 2);
  CHECK(!val.ok[0]);
  // no fixed point needs to exist at 0.01 either; the point is that the
  // first entry's failure did not abort the sweep
}

TEST_CASE("find_zero in two dimensions") {
  const auto f = [](const Vec& z) {
    return Vec{z[0] * z[0] + z[1] - 3.0, z[0] - z[1] + 1.0};
  };
  const ZeroResult r = find_zero(f, Vec{0.5, 0.5});
  CHECK(r.converged);
  CHECK(r.z_star[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.z_star[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.simple);
}

TEST_CASE("van der Pol radial averaged field has its simple zero at r = 2") {
  const System s = oracles::load_corpus("vdp_radial").system;
  const MelnikovEvaluator mel(s, cfg());
  const auto f = [&](const Vec& z) { return mel.averaged_f(z)[0]; };

  // independent derivation: f_1(r) = pi r (1 - r^2/4)
  for (double r : {0.5, 1.5, 3.0})
    CHECK(f(Vec{r})[0] ==
          doctest::Approx(std::numbers::pi * r * (1 - r * r / 4)).epsilon(1e-10));

  const ZeroResult zr = find_zero(f, Vec{1.2});
  CHECK(zr.converged);
  CHECK(zr.z_star[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(zr.simple);
}

TEST_CASE("displacement") {
  const System s = oracles::load_corpus("ord1_contract").system;
  SUBCASE("eps = 0 is the identity map") {
    const Vec d = displacement(s, Vec{0.7}, 0.0, cfg());
    CHECK(d[0] == 0.0);
  }
  SUBCASE("displacement - eps f_1 = O(eps^2)") {
    const auto fs = averaged_f(s, Vec{0.7}, cfg());
    std::vector<double> eps = {1e-2, 1e-3, 1e-4};
    std::vector<double> res;
    for (double e : eps)
      res.push_back(std::abs(displacement(s, Vec{0.7}, e, cfg())[0] - e * fs[0][0]));
    const double slope = fit_loglog_slope(eps, res);
    CHECK(slope > 1.7);
    CHECK(slope < 2.3);
  }
}

TEST_CASE("validate_orbit against the linear closed form") {
  // x' = eps(-x + sin t): the periodic solution starts at -eps/(1+eps^2).
  const System s = oracles::load_corpus("linear_decay").system;
  const std::vector<double> eps = {0.05, 0.02, 0.01};
  const OrbitValidation val = validate_orbit(s, Vec{0.0}, eps, cfg());
  REQUIRE(val.z_eps.size() == 3);
  for (size_t i = 0; i < eps.size(); ++i) {
    CHECK(val.ok[i]);
    const double expected = -eps[i] / (1.0 + eps[i] * eps[i]);
    CHECK(val.z_eps[i][0] == doctest::Approx(expected).epsilon(1e-8));
    CHECK(val.displacement_norms[i] < 1e-9 * (1.0 + std::abs(val.z_eps[i][0])));
    CHECK(val.sigma_mins[i] > 1e-8);  // isolated
  }
  // |z_eps - z*| ~ eps: slope about 1
  CHECK(val.slope_estimate > 0.8);
  // distances shrink along the decreasing eps list
  CHECK(val.distances[0] > val.distances[1]);
  CHECK(val.distances[1] > val.distances[2]);
}

TEST_CASE("validate_orbit with an empty eps list") {
  const System s = oracles::load_corpus("linear_decay").system;
  const OrbitValidation val = validate_orbit(s, Vec{0.0}, {}, cfg());
  CHECK(val.z_eps.empty());
  CHECK(std::isnan(val.slope_estimate));
}

TEST_CASE("validate_orbit on a planar system") {
  const System s = oracles::load_corpus("rot2d").system;
  const MelnikovEvaluator mel(s, cfg());
  const auto f = [&](const Vec& z) { return mel.averaged_f(z)[0]; };
  const ZeroResult zr = find_zero(f, Vec{0.2, -0.2});
  CHECK(zr.converged);
  CHECK(std::abs(zr.z_star[0]) < 1e-9);
  CHECK(std::abs(zr.z_star[1]) < 1e-9);
  CHECK(zr.simple);

  const std::vector<double> eps = {0.05, 0.02};
  const OrbitValidation val = validate_orbit(s, zr.z_star, eps, cfg());
  for (size_t i = 0; i < eps.size(); ++i) {
    CHECK(val.ok[i]);
    CHECK(val.sigma_mins[i] > 1e-8);
  }
}

TEST_CASE("order_study") {
  const std::vector<double> eps = {1e-2, 3.162277660168379e-3, 1e-3};
  SUBCASE("k = 1 slope near 2") {
    const System s = oracles::load_corpus("ord1_contract").system;
    const OrderStudy st = order_study(s, Vec{0.4}, eps, cfg());
    CHECK(st.slope > 1.7);
    CHECK(st.slope < 2.3);
  }
  SUBCASE("needs at least three points") {
    const System s = oracles::load_corpus("ord1_contract").system;
    CHECK_THROWS_AS(order_study(s, Vec{0.4}, std::vector<double>{1e-2}, cfg()),
                    std::invalid_argument);
  }
}

TEST_CASE("step-doubling displacement matches the fixed-step path") {
  const System s = oracles::load_corpus("rot2d").system;
  IntegratorConfig dbl;
  dbl.method = RkMethod::rk4_doubling;
  dbl.abs_tol = 1e-12;
  dbl.rel_tol = 1e-12;
  dbl.period = s.T;
  const Vec z = {0.3, -0.4};
  const Vec a = displacement(s, z, 0.05, cfg(4096));
  const Vec b = displacement(s, z, 0.05, dbl);
  for (int i = 0; i < s.n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("fit_loglog_slope recovers an exact power law") {
  const std::vector<double> x = {1e-1, 1e-2, 1e-3};
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 * std::pow(v, 3.0));
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
}
