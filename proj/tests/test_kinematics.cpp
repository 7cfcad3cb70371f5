#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gqmech/errors.hpp"
#include "gqmech/kinematics.hpp"

using namespace gqm;

namespace {

JetVelocity rand_subluminal(std::mt19937_64& eng, double vmax = 0.9) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> vel(-0.5, 0.5);
  JetVelocity v;
  v.q0 = pos(eng);
  v.q = {pos(eng), pos(eng), pos(eng)};
  v.v = {vel(eng), vel(eng), vel(eng)};
  double n2 = v.v[0] * v.v[0] + v.v[1] * v.v[1] + v.v[2] * v.v[2];
  if (n2 >= vmax * vmax)
    for (double& c : v.v) c *= 0.8 * vmax / std::sqrt(n2);
  return v;
}

}  // namespace

TEST_CASE("identity transition leaves jet velocities unchanged") {
  Chart identity = Chart(4).with_transition(
      [](std::span<const double> q) { return Vec(q.begin(), q.end()); },
      [](std::span<const double>) { return Mat::identity(4); });
  std::mt19937_64 eng(3);
  JetVelocity v = rand_subluminal(eng);
  JetVelocity w = jet_transition(v, identity);
  CHECK(w.q0 == v.q0);
  for (int i = 0; i < 3; ++i) CHECK(w.v[i] == v.v[i]);
}

TEST_CASE("boost of a zero velocity") {
  JetVelocity rest;
  rest.q0 = 0.0;
  rest.q = {0.0, 0.0, 0.0};
  rest.v = {0.0, 0.0, 0.0};
  const double alpha = 0.7;
  JetVelocity moved = jet_transition(rest, lorentz_boost_chart(alpha));
  CHECK(moved.v[0] == doctest::Approx(-std::tanh(alpha)).epsilon(1e-14));
  CHECK(moved.v[1] == 0.0);
  CHECK(moved.v[2] == 0.0);
}

TEST_CASE("boost transitions agree with the closed form and invert") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> rap(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    JetVelocity v = rand_subluminal(eng);
    const double alpha = rap(eng);

    JetVelocity closed = lorentz_boost_velocity(v, alpha);
    JetVelocity chart = jet_transition(v, lorentz_boost_chart(alpha));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(closed.v[i] - chart.v[i]) < 1e-12);

    JetVelocity back = lorentz_boost_velocity(closed, -alpha);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(back.v[i] - v.v[i]) < 1e-12);

    // Subluminal velocities stay subluminal.
    double n2 = 0.0;
    for (double c : closed.v) n2 += c * c;
    CHECK(n2 < 1.0);
  }
  JetVelocity v = rand_subluminal(eng);
  JetVelocity same = lorentz_boost_velocity(v, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(same.v[i] == v.v[i]);
}

TEST_CASE("lift and projection invert each other") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    JetVelocity v = rand_subluminal(eng);
    double c = scale(eng) * (trial % 2 ? 1.0 : -1.0);
    TangentVector w = lambda_lift(v, c);
    CHECK(w.qdot[0] == c);
    CHECK(w.qdot[1] == doctest::Approx(c * v.v[0]));
    JetVelocity back = rho_project(w);
    for (int i = 0; i < 3; ++i) CHECK(back.v[i] == doctest::Approx(v.v[i]).epsilon(1e-14));
  }

  TangentVector stuck({0.0, 0.0}, {0.0, 1.0});
  CHECK_THROWS_AS(rho_project(stuck), ChartSingularity);
}

TEST_CASE("hyperboloid residuals") {
  MetricField eta = MetricField::minkowski(4);

  TangentVector rest({0.0, 0.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0});
  CHECK(hyperboloid_residual(rest, eta) == doctest::Approx(0.0));

  const double alpha = 0.8;
  TangentVector boosted({0.0, 0.0, 0.0, 0.0},
                        {std::cosh(alpha), std::sinh(alpha), 0.0, 0.0});
  CHECK(std::abs(hyperboloid_residual(boosted, eta)) < 1e-14);

  std::mt19937_64 eng(9);
  for (int trial = 0; trial < 30; ++trial) {
    JetVelocity v = rand_subluminal(eng);
    double v2 = v.v[0] * v.v[0] + v.v[1] * v.v[1] + v.v[2] * v.v[2];
    TangentVector w = lambda_lift(v, 1.0 / std::sqrt(1.0 - v2));
    CHECK(std::abs(hyperboloid_residual(w, eta)) < 1e-12);
    TangentVector wb = boost_tangent(w, 0.5 + 0.01 * trial);
    CHECK(std::abs(hyperboloid_residual(wb, eta)) < 1e-12);
    CHECK(wb.qdot[0] > 0.0);  // stays future-pointing
  }
}

TEST_CASE("free-mass Legendre map") {
  SUBCASE("rest velocity maps to rest momentum") {
    JetVelocity rest;
    rest.q0 = 1.0;
    rest.q = {0.2, -0.1, 0.4};
    rest.v = {0.0, 0.0, 0.0};
    PhasePoint z = legendre_free_mass(rest, 2.5);
    CHECK(z.p[0] == doctest::Approx(-2.5));
    CHECK(z.p[1] == 0.0);
    CHECK(z.p[2] == 0.0);
    CHECK(z.p[3] == 0.0);
    CHECK(z.q[0] == 1.0);
  }

  SUBCASE("output lies on the mass shell") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> mass(0.5, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
      JetVelocity v = rand_subluminal(eng);
      const double m = mass(eng);
      PhasePoint z = legendre_free_mass(v, m);
      double shell = z.p[0] * z.p[0] - z.p[1] * z.p[1] - z.p[2] * z.p[2] - z.p[3] * z.p[3];
      CHECK(std::abs(shell - m * m) < 1e-12 * m * m);
    }
  }

  SUBCASE("commutes with boosts") {
    std::mt19937_64 eng(13);
    for (int trial = 0; trial < 30; ++trial) {
      JetVelocity v = rand_subluminal(eng);
      const double alpha = 0.9;
      PhasePoint direct = legendre_free_mass(lorentz_boost_velocity(v, alpha), 1.2);
      Vec covector = boost_covector(legendre_free_mass(v, 1.2).p, alpha);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(direct.p[i] - covector[i]) < 1e-10);
    }
  }

  SUBCASE("superluminal input is refused") {
    JetVelocity fast;
    fast.q0 = 0.0;
    fast.q = {0.0, 0.0, 0.0};
    fast.v = {0.8, 0.7, 0.0};
    CHECK_THROWS_AS(legendre_free_mass(fast, 1.0), SuperluminalInput);
  }
}

TEST_CASE("transition denominator guard") {
  // ch a - v sh a = 0 at v = coth a; reachable only for |v| > 1, so use a
  // synthetic chart whose denominator vanishes inside the ball.
  Chart degenerate = Chart(2).with_transition(
      [](std::span<const double> q) { return Vec{q[0] + 2.0 * q[1], q[1]}; },
      [](std::span<const double>) {
        Mat j(2, 2);
        j(0, 0) = 1.0;
        j(0, 1) = 2.0;
        j(1, 0) = 0.0;
        j(1, 1) = 1.0;
        return j;
      });
  JetVelocity v;
  v.q0 = 0.0;
  v.q = {0.0};
  v.v = {-0.5};  // denominator 1 + 2(-0.5) = 0
  CHECK_THROWS_AS(jet_transition(v, degenerate), DenominatorVanishes);
}
