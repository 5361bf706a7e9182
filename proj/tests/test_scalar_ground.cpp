#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "nlsground/radial.hpp"
#include "nlsground/scalar_ground.hpp"

using namespace nlsground;

TEST_CASE("1D soliton formula") {
  CHECK(soliton_1d(4.0, 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(soliton_1d(3.5, 0.0) == doctest::Approx(std::pow(1.75, 1.0 / 1.5)).epsilon(1e-14));
  for (double x : {0.3, 1.0, 2.7})
    CHECK(soliton_1d(4.0, x) ==
          doctest::Approx(std::sqrt(2.0) / std::cosh(x)).epsilon(1e-14));
}

TEST_CASE("shooting recovers the 1D quartic soliton") {
  auto g = make_grid(1, 20.0, 4001);
  auto st = solve_scalar_ground({1, 4.0}, g);

  CHECK(st.shoot_height == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  double worst = 0.0;
  for (size_t i = 0; i < g->points; ++i)
    worst = std::max(worst,
                     std::abs(st.field.values[i] - std::sqrt(2.0) / std::cosh(g->r[i])));
  CHECK(worst / st.shoot_height < 1e-7);

  CHECK(st.mass_sq == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(st.grad_sq == doctest::Approx(4.0 / 3.0).epsilon(3e-5));  // O(h^2) gradient bias
  CHECK(st.pnorm_pow == doctest::Approx(16.0 / 3.0).epsilon(1e-7));
  CHECK(st.residual < 1e-3);

  // Off-grid evaluation tracks the analytic profile too.
  for (double x : {0.0123, 1.77, 6.006, 14.5})
    CHECK(st.evaluate(x) ==
          doctest::Approx(std::sqrt(2.0) / std::cosh(x)).epsilon(1e-6));
  for (size_t i = 0; i < g->points; i += 211)
    CHECK(st.evaluate(g->r[i]) == st.field.values[i]);
}

TEST_CASE("cubic-case mass in 1D equals 6") {
  // \int ((3/2) sech^2(x/2))^2 dx = (9/2)\int sech^4 u du = 6.
  auto st = solve_scalar_ground({1, 3.0}, make_grid(1, 25.0, 2501));
  CHECK(st.shoot_height == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(st.mass_sq == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("profiles are positive, decreasing, and satisfy both identities") {
  struct Case {
    int N;
    double p;
  };
  for (auto [N, p] : {Case{2, 5.0}, Case{3, 4.0}, Case{4, 3.5}}) {
    CAPTURE(N);
    auto st = solve_scalar_ground({N, p}, make_grid(N, 15.0, 12001));
    for (size_t i = 0; i + 1 < st.field.values.size(); ++i) {
      CHECK(st.field.values[i] > 0.0);
      if (st.field.values[i] > 1e-12 * st.shoot_height)
        CHECK(st.field.values[i + 1] < st.field.values[i]);
    }
    // Nehari: G + M = P; dilation identity: G = (p-2)N/(2p) P.
    const double nehari = (st.grad_sq + st.mass_sq - st.pnorm_pow) / st.pnorm_pow;
    const double pohozaev =
        st.grad_sq / ((p - 2.0) * N / (2.0 * p) * st.pnorm_pow) - 1.0;
    CHECK(std::abs(nehari) < 1e-5);
    CHECK(std::abs(pohozaev) < 1e-5);
  }
}

TEST_CASE("frequency scaling closed form") {
  auto st = solve_scalar_ground({1, 4.0}, make_grid(1, 20.0, 2001));
  for (double a : {1.0, 2.0, 3.7})
    CHECK(scalar_lambda(st, 1.0, a) == doctest::Approx(a * a / 16.0).epsilon(1e-6));
  // mu=1, a=||U||_2^2 leaves the profile untouched.
  CHECK(scalar_lambda(st, 1.0, st.mass_sq) == doctest::Approx(1.0).epsilon(1e-13));
  // Power law in a alone.
  auto st3 = solve_scalar_ground({3, 4.0}, make_grid(3, 15.0, 1501));
  const double ratio = scalar_lambda(st3, 1.0, 4.0) / scalar_lambda(st3, 1.0, 1.0);
  CHECK(ratio == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK_THROWS_AS(scalar_lambda(solve_scalar_ground({1, 6.0}, make_grid(1, 15.0, 1501)),
                                1.0, 1.0),
                  std::invalid_argument);  // mass-critical exponent rejected
}

TEST_CASE("mass rescaling hits the target mass") {
  auto st = solve_scalar_ground({1, 4.0}, make_grid(1, 20.0, 2001));
  auto wide = make_grid(1, 120.0, 12001);
  for (double a : {0.5, 1.0, 2.0}) {
    auto [z, lam] = scale_to_mass(st, 1.0, a, wide);
    CHECK(lam == doctest::Approx(a * a / 16.0).epsilon(1e-6));
    CHECK(mass(z) == doctest::Approx(a).epsilon(1e-6));
  }
  auto [z1, l1] = scale_to_mass(st, 1.0, 1.0, wide);
  CHECK(z1.values[0] == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-6));
}

TEST_CASE("constrained energy level: closed form vs direct quadrature") {
  auto st = solve_scalar_ground({1, 4.0}, make_grid(1, 20.0, 2001));
  // h = 2.5e-3 keeps the O(h^2) gradient-quadrature bias under 1e-5 relative.
  auto wide = make_grid(1, 120.0, 48001);
  for (double mu : {0.5, 1.0, 2.0}) {
    for (double a : {1.0, 2.0}) {
      const double m = scalar_energy_level(st, mu, a);
      CHECK(m == doctest::Approx(-mu * mu * a * a * a / 96.0).epsilon(1e-5));
      auto [z, lam] = scale_to_mass(st, mu, a, wide);
      CHECK(scalar_energy_direct(z, 4.0, mu) == doctest::Approx(m).epsilon(1e-5));
    }
  }
  // Supercritical sign and monotonicity.
  auto st3 = solve_scalar_ground({3, 4.0}, make_grid(3, 15.0, 1501));
  CHECK(scalar_energy_level(st3, 1.0, 1.0) > 0.0);
  CHECK(scalar_energy_level(st3, 1.0, 2.0) < scalar_energy_level(st3, 1.0, 1.0));
}

TEST_CASE("fiber maximizer closed forms") {
  const int N = 3;
  const double p = 4.0, mu = 1.4, A = 2.3, B = 0.7;
  const double t = scalar_fiber_scale(N, p, mu, A, B);
  const double gp = (p - 2.0) * N / 2.0;
  auto psi = [&](double s) { return 0.5 * s * s * A - std::pow(s, gp) * mu * B / p; };
  const double d = 1e-6 * t;
  CHECK(std::abs((psi(t + d) - psi(t - d)) / (2 * d)) < 1e-8 * A);  // critical point
  CHECK(psi(t) > psi(0.9 * t));
  CHECK(psi(t) > psi(1.1 * t));  // a maximum

  // Closed-form optimum value (independent algebra).
  const double D = N * (p - 2.0) - 4.0;
  const double f = D / (2.0 * (p - 2.0) * N) * std::pow(A, N * (p - 2.0) / D) *
                   std::pow(2.0 * p / ((p - 2.0) * N), 4.0 / D) * std::pow(mu * B, -4.0 / D);
  CHECK(scalar_fiber_value(N, p, mu, A, B) == doctest::Approx(f).epsilon(1e-10));

  // A pair already satisfying the dilation identity maps to t = 1.
  const double Bc = A / ((p - 2.0) * N / (2.0 * p) * mu);
  CHECK(scalar_fiber_scale(N, p, mu, A, Bc) == doctest::Approx(1.0).epsilon(1e-14));

  // t(s*u) = t(u)/s on an actual dilated field.
  auto g = make_grid(3, 30.0, 6001);
  std::vector<double> v(g->points);
  for (size_t i = 0; i < g->points; ++i) v[i] = std::exp(-0.5 * g->r[i] * g->r[i]);
  auto u = make_field(g, v);
  const double tu =
      scalar_fiber_scale(N, p, 1.0, grad_norm_sq(u), lp_norm_pow(u, p));
  for (double s : {0.5, 2.0}) {
    auto us = dilate_field(u, s);
    const double ts =
        scalar_fiber_scale(N, p, 1.0, grad_norm_sq(us), lp_norm_pow(us, p));
    CHECK(ts == doctest::Approx(tu / s).epsilon(1e-3));
  }
}

TEST_CASE("mass threshold between the two semitrivial levels") {
  auto up = solve_scalar_ground({1, 7.0}, make_grid(1, 15.0, 1501));
  auto uq = solve_scalar_ground({1, 9.0}, make_grid(1, 15.0, 1501));

  CHECK(mass_threshold(up, up, 1.3, 1.3, 2.2) == doctest::Approx(2.2).epsilon(1e-14));

  const double a = 1.3, mu1 = 1.0, mu2 = 0.8;
  const double bs = mass_threshold(up, uq, mu1, mu2, a);
  CHECK(bs > 0.0);
  const double mp = scalar_energy_level(up, mu1, a);
  CHECK(scalar_energy_level(uq, mu2, bs) == doctest::Approx(mp).epsilon(1e-8));
  CHECK(scalar_energy_level(uq, mu2, 2.0 * bs) < mp);
  CHECK(scalar_energy_level(uq, mu2, 0.5 * bs) > mp);

  auto sub = solve_scalar_ground({1, 4.0}, make_grid(1, 15.0, 1501));
  CHECK_THROWS_AS(mass_threshold(sub, uq, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("interpolation inequality constant is extremal at the ground state") {
  auto g = make_grid(1, 30.0, 3001);
  auto st = solve_scalar_ground({1, 4.0}, make_grid(1, 20.0, 2001));
  // Closed value from the analytic soliton norms.
  const double exact =
      std::pow(16.0 / 3.0, 0.25) / (std::pow(4.0 / 3.0, 0.125) * std::pow(4.0, 0.375));
  const double c = gn_constant(st);
  CHECK(c == doctest::Approx(exact).epsilon(1e-5));

  const double p = 4.0, theta = 1.0 * (p - 2.0) / (2.0 * p);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> alpha(0.3, 3.0), bump(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const double al = alpha(rng), bm = bump(rng);
    std::vector<double> v(g->points);
    for (size_t i = 0; i < g->points; ++i) {
      const double r = g->r[i];
      v[i] = std::exp(-0.5 * al * r * r) * (1.0 + bm * r * r / (1.0 + r * r));
    }
    auto u = make_field(g, v);
    const double quot = std::pow(lp_norm_pow(u, p), 1.0 / p) /
                        (std::pow(grad_norm_sq(u), 0.5 * theta) *
                         std::pow(mass(u), 0.5 * (1.0 - theta)));
    CHECK(quot <= c * (1.0 + 1e-4));
  }
}

TEST_CASE("exponent window enforcement") {
  CHECK_THROWS_AS(solve_scalar_ground({1, 2.0}, make_grid(1, 10.0, 101)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_scalar_ground({3, 6.0}, make_grid(3, 10.0, 101)),
                  std::invalid_argument);
  CHECK(sobolev_critical_exponent(1) == std::numeric_limits<double>::infinity());
  CHECK(sobolev_critical_exponent(3) == doctest::Approx(6.0));
  CHECK(mass_critical_exponent(2) == doctest::Approx(4.0));
}
