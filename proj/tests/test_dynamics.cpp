#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gqmech/dynamics.hpp"
#include "gqmech/errors.hpp"

using namespace gqm;

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

PhasePoint on_shell_start(const HamiltonianSystem& sys, Vec q, Vec ps) {
  PhasePoint z;
  z.q = std::move(q);
  z.p.assign(sys.dim_q, 0.0);
  z.p[0] = on_shell_p0(sys, z.q, ps);
  for (std::size_t i = 1; i < sys.dim_q; ++i) z.p[i] = ps[i - 1];
  return z;
}
}  // namespace

TEST_CASE("non-relativistic vector field") {
  VerticalPhasePoint s(0.0, {0.7}, {0.4});

  SUBCASE("free kinetic term") {
    HamiltonianSystem sys = nonrel_free(1);
    VerticalTangent u = nonrel_vector_field(sys, s);
    CHECK(u.dt == 1.0);
    CHECK(u.dq[0] == doctest::Approx(0.4));
    CHECK(u.dp[0] == 0.0);
  }

  SUBCASE("constant Hamiltonian is static") {
    HamiltonianSystem sys;
    sys.kind = SystemKind::NonRelativistic;
    sys.dim_q = 2;
    sys.h_vertical = VerticalObservable::constant(1, 3.0);
    VerticalTangent u = nonrel_vector_field(sys, s);
    CHECK(u.dt == 1.0);
    CHECK(u.dq[0] == 0.0);
    CHECK(u.dp[0] == 0.0);
  }

  SUBCASE("harmonic oscillator") {
    HamiltonianSystem sys = nonrel_oscillator(3.0, 1);
    VerticalTangent u = nonrel_vector_field(sys, s);
    CHECK(u.dq[0] == doctest::Approx(0.4));
    CHECK(u.dp[0] == doctest::Approx(-9.0 * 0.7));
  }
}

TEST_CASE("relativistic vector fields of the built-in systems") {
  SUBCASE("free mass follows -(1/m) eta p") {
    HamiltonianSystem sys = free_special(1.4);
    PhasePoint z = on_shell_start(sys, {0.0, 0.1, 0.2, -0.3}, {0.5, -0.2, 0.1});
    PhaseTangent u = flow_vector_field(sys, z);
    CHECK(u.dq[0] == doctest::Approx(-z.p[0] / 1.4));
    for (int i = 1; i < 4; ++i) {
      CHECK(u.dq[i] == doctest::Approx(z.p[i] / 1.4));
      CHECK(u.dp[i] == doctest::Approx(0.0));
    }
    CHECK(u.dq[0] > 0.0);  // future-pointing on the W+ branch
  }

  SUBCASE("charged system with zero potential reduces to the free one") {
    std::vector<ScalarField> zero(4, ScalarField::constant(4, 0.0));
    HamiltonianSystem charged = charged_em(1.4, 2.0, zero);
    HamiltonianSystem free_sys = free_special(1.4);
    PhasePoint z = on_shell_start(free_sys, {0.0, 0.1, 0.2, -0.3}, {0.5, -0.2, 0.1});
    PhaseTangent uc = flow_vector_field(charged, z);
    PhaseTangent uf = flow_vector_field(free_sys, z);
    for (int i = 0; i < 4; ++i) {
      CHECK(uc.dq[i] == doctest::Approx(uf.dq[i]));
      CHECK(uc.dp[i] == doctest::Approx(uf.dp[i]));
    }
  }

  SUBCASE("charged force follows the gauge-coupled pattern") {
    // dp_lambda/ds = -(e/m) eta^{mu nu} d_lambda A_mu (p_nu - e A_nu)
    const double m = 1.1, e = 0.7;
    HamiltonianSystem sys = charged_em(m, e, constant_magnetic_potential(0.9));
    PhasePoint z = on_shell_start(sys, {0.2, 0.4, -0.3, 0.1}, {0.6, 0.1, -0.2});
    PhaseTangent u = flow_vector_field(sys, z);
    Vec eta = {1.0, -1.0, -1.0, -1.0};
    for (std::size_t lam = 0; lam < 4; ++lam) {
      double expect = 0.0;
      for (std::size_t mu = 0; mu < 4; ++mu) {
        Vec da = sys.potential[mu].gradient(z.q);
        double pi = z.p[mu] - e * sys.potential[mu](z.q);
        expect += -(e / m) * eta[mu] * da[lam] * pi;
      }
      CHECK(u.dp[lam] == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("expression-backed potential matches the polynomial one") {
    HamiltonianSystem poly_sys = charged_em(1.0, 1.0, constant_magnetic_potential(1.0));
    std::vector<std::string> names = {"q0", "q1", "q2", "q3"};
    std::vector<ScalarField> fields;
    fields.push_back(ScalarField::expression(4, Expression::parse("0", names)));
    fields.push_back(ScalarField::expression(4, Expression::parse("-0.5*q2", names)));
    fields.push_back(ScalarField::expression(4, Expression::parse("0.5*q1", names)));
    fields.push_back(ScalarField::expression(4, Expression::parse("0", names)));
    HamiltonianSystem expr_sys = charged_em(1.0, 1.0, std::move(fields));
    PhasePoint z = on_shell_start(poly_sys, {0.0, 0.4, -0.3, 0.2}, {0.6, 0.1, -0.2});
    CHECK(expr_sys.generator.value(z) ==
          doctest::Approx(poly_sys.generator.value(z)).epsilon(1e-13));
    PhaseTangent ua = flow_vector_field(poly_sys, z);
    PhaseTangent ub = flow_vector_field(expr_sys, z);
    for (int i = 0; i < 4; ++i) {
      CHECK(ub.dq[i] == doctest::Approx(ua.dq[i]).epsilon(1e-12));
      CHECK(ub.dp[i] == doctest::Approx(ua.dp[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("constraint residuals") {
  SUBCASE("free system on and off the shell") {
    HamiltonianSystem sys = free_special(1.0);
    PhasePoint z = on_shell_start(sys, {0.0, 0.0, 0.0, 0.0}, {0.3, 0.4, 0.0});
    CHECK(std::abs(constraint_residual(sys, z)) < 1e-14);
    PhasePoint rest = z;
    rest.p = {0.0, 0.0, 0.0, 0.0};
    CHECK(constraint_residual(sys, rest) == doctest::Approx(-1.0));
  }

  SUBCASE("non-relativistic constraint is p_0 + H") {
    HamiltonianSystem osc = nonrel_oscillator(2.0, 1);
    VerticalPhasePoint s(0.0, {0.5}, {0.3});
    PhasePoint z = lift_on_section(osc, s);
    CHECK(std::abs(constraint_residual(osc, z)) < 1e-14);
    z.p[0] += 0.25;
    CHECK(constraint_residual(osc, z) == doctest::Approx(0.25));
  }

  SUBCASE("invariance residual for a position-dependent field") {
    std::vector<ScalarField> pot;
    pot.push_back(ScalarField::constant(4, 0.0));
    pot.push_back(ScalarField::constant(4, 0.0));
    Polynomial a2 = Polynomial::variable(4, 1) * 0.6 +
                    Polynomial::variable(4, 1) * Polynomial::variable(4, 1) * 0.2;
    pot.push_back(ScalarField::polynomial(std::move(a2)));
    pot.push_back(ScalarField::constant(4, 0.0));
    HamiltonianSystem varying = charged_em(1.0, 0.8, std::move(pot));
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Vec q = {dist(eng), dist(eng), dist(eng), dist(eng)};
      Vec ps = {dist(eng), dist(eng), dist(eng)};
      CHECK(std::abs(constraint_invariance_residual(
                varying, on_shell_start(varying, q, ps))) < 1e-9);
    }
  }

  SUBCASE("invariance residual vanishes for the built-ins") {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    HamiltonianSystem free_sys = free_special(1.2);
    HamiltonianSystem charged = charged_em(1.0, 0.8, constant_magnetic_potential(0.7));
    HamiltonianSystem curved = curved_metric(1.0, example_curved_metric());
    for (int trial = 0; trial < 20; ++trial) {
      Vec q = {dist(eng), dist(eng), dist(eng), dist(eng)};
      Vec ps = {dist(eng), dist(eng), dist(eng)};
      CHECK(std::abs(constraint_invariance_residual(
                free_sys, on_shell_start(free_sys, q, ps))) < 1e-10);
      CHECK(std::abs(constraint_invariance_residual(
                charged, on_shell_start(charged, q, ps))) < 1e-10);
      CHECK(std::abs(constraint_invariance_residual(
                curved, on_shell_start(curved, q, ps))) < 1e-6);
    }
  }
}

TEST_CASE("presymplectic contraction residual") {
  HamiltonianSystem osc = nonrel_oscillator(1.7, 2);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    VerticalPhasePoint s(dist(eng), {dist(eng), dist(eng)}, {dist(eng), dist(eng)});
    Vec r = contraction_residual_nonrel(osc, s);
    CHECK(norm_inf(r) < 1e-10);

    // A perturbed connection is detected at the size of the perturbation.
    VerticalTangent gamma;
    gamma.dt = 1.0;
    gamma.dq = osc.h_vertical.grad_p(s);
    gamma.dp = osc.h_vertical.grad_q(s);
    for (double& v : gamma.dp) v = -v;
    const double delta = 1e-3;
    gamma.dq[0] += delta;
    Vec rp = contraction_residual_nonrel(osc, s, &gamma);
    CHECK(norm_inf(rp) >= delta * 0.5);
  }

  HamiltonianSystem flat;
  flat.kind = SystemKind::NonRelativistic;
  flat.dim_q = 2;
  flat.h_vertical = VerticalObservable::constant(1, 2.0);
  VerticalPhasePoint s(0.1, {0.2}, {0.3});
  CHECK(norm_inf(contraction_residual_nonrel(flat, s)) == 0.0);
}

TEST_CASE("integration") {
  SUBCASE("zero duration records only the initial point") {
    HamiltonianSystem sys = free_special(1.0);
    PhasePoint z0 = on_shell_start(sys, {0.0, 0.0, 0.0, 0.0}, {0.1, 0.0, 0.0});
    IntegratorConfig cfg;
    TrajectoryRecord rec = integrate(sys, z0, cfg, 0.0);
    CHECK(rec.size() == 1);
    CHECK(rec.parameter[0] == 0.0);
  }

  SUBCASE("free momenta are constant and positions affine") {
    HamiltonianSystem sys = free_special(2.0);
    PhasePoint z0 = on_shell_start(sys, {0.0, 1.0, -1.0, 0.5}, {0.3, 0.7, -0.4});
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.record_every = 10;
    TrajectoryRecord rec = integrate(sys, z0, cfg, 1.0);
    PhaseTangent u0 = flow_vector_field(sys, z0);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      for (int k = 0; k < 4; ++k) {
        CHECK(rec.states[i].p[k] == z0.p[k]);  // exactly constant
        CHECK(rec.states[i].q[k] ==
              doctest::Approx(z0.q[k] + rec.parameter[i] * u0.dq[k]).epsilon(1e-12));
      }
      CHECK(std::abs(rec.residuals[i]) < 1e-12);
    }
  }

  SUBCASE("oscillator lifted to the section stays on it") {
    HamiltonianSystem osc = nonrel_oscillator(2.0, 1);
    PhasePoint z0 = lift_on_section(osc, VerticalPhasePoint(0.0, {0.7}, {0.0}));
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.record_every = 100;
    TrajectoryRecord rec = integrate(osc, z0, cfg, 5.0);
    for (std::size_t i = 0; i < rec.size(); ++i)
      CHECK(std::abs(rec.residuals[i]) < 1e-9);
    // q0 tracks the flow parameter.
    CHECK(rec.states.back().q[0] == doctest::Approx(rec.parameter.back()));
  }

  SUBCASE("implicit midpoint conserves quadratic invariants") {
    HamiltonianSystem charged = charged_em(1.0, 1.0, constant_magnetic_potential(1.0));
    PhasePoint z0 = on_shell_start(charged, {0.0, 0.0, 0.0, 0.0}, {0.9, 0.0, 0.2});
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::ImplicitMidpoint;
    cfg.step = 0.01;
    cfg.record_every = 50;
    TrajectoryRecord rec = integrate(charged, z0, cfg, 10.0);
    for (double r : rec.residuals) CHECK(std::abs(r) < 1e-11);
  }

  SUBCASE("implicit solve diverges on an absurd step") {
    HamiltonianSystem charged = charged_em(1.0, 1.0, constant_magnetic_potential(1.0));
    PhasePoint z0 = on_shell_start(charged, {0.0, 0.0, 0.0, 0.0}, {0.9, 0.0, 0.2});
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::ImplicitMidpoint;
    cfg.step = 1e3;
    cfg.implicit_max_iter = 10;
    CHECK_THROWS_AS(integrate(charged, z0, cfg, 2e3), ImplicitSolveDiverged);
  }

  SUBCASE("off-shell initial data is refused") {
    HamiltonianSystem sys = free_special(1.0);
    PhasePoint z0({0.0, 0.0, 0.0, 0.0}, {-0.5, 0.0, 0.0, 0.0});
    IntegratorConfig cfg;
    CHECK_THROWS_AS(integrate(sys, z0, cfg, 1.0), Error);
  }

  SUBCASE("per-step projection pins the shell at coarse steps") {
    HamiltonianSystem charged = charged_em(1.0, 1.0, constant_magnetic_potential(1.0));
    PhasePoint z0 = on_shell_start(charged, {0.0, 0.0, 0.0, 0.0}, {0.9, 0.0, 0.2});
    IntegratorConfig cfg;
    cfg.step = 0.05;
    cfg.record_every = 10;
    cfg.project_each_step = true;
    TrajectoryRecord rec = integrate(charged, z0, cfg, 5.0);
    for (double r : rec.residuals) CHECK(std::abs(r) < 1e-10);
  }
}

TEST_CASE("boost covariance of the free flow") {
  // Boosting the initial data and integrating commutes with integrating and
  // then boosting.
  HamiltonianSystem sys = free_special(1.2);
  PhasePoint z0 = on_shell_start(sys, {0.0, 0.5, -0.2, 0.3}, {0.4, 0.2, -0.1});
  const double alpha = 0.8;
  const double ch = std::cosh(alpha), sh = std::sinh(alpha);
  auto boost_point = [&](const PhasePoint& z) {
    PhasePoint out = z;
    out.q[0] = z.q[0] * ch - z.q[1] * sh;
    out.q[1] = -z.q[0] * sh + z.q[1] * ch;
    out.p[0] = ch * z.p[0] + sh * z.p[1];
    out.p[1] = sh * z.p[0] + ch * z.p[1];
    return out;
  };

  IntegratorConfig cfg;
  cfg.step = 1e-3;
  cfg.record_every = 200;
  TrajectoryRecord direct = integrate(sys, boost_point(z0), cfg, 2.0);
  TrajectoryRecord then_boost = integrate(sys, z0, cfg, 2.0);
  REQUIRE(direct.size() == then_boost.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    PhasePoint boosted = boost_point(then_boost.states[i]);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(direct.states[i].q[k] - boosted.q[k]) < 1e-9);
      CHECK(std::abs(direct.states[i].p[k] - boosted.p[k]) < 1e-9);
    }
  }
}

TEST_CASE("on-shell momentum solver") {
  SUBCASE("free branch") {
    HamiltonianSystem sys = free_special(1.5);
    Vec q = {0.0, 0.1, 0.2, 0.3};
    Vec ps = {0.4, -0.2, 0.6};
    double p0 = on_shell_p0(sys, q, ps);
    CHECK(p0 == doctest::Approx(-std::sqrt(1.5 * 1.5 + 0.16 + 0.04 + 0.36)));
  }
  SUBCASE("curved branch satisfies the constraint") {
    HamiltonianSystem sys = curved_metric(1.1, example_curved_metric());
    Vec q = {0.2, -0.4, 0.6, 0.1};
    Vec ps = {0.3, 0.2, -0.5};
    PhasePoint z = on_shell_start(sys, q, ps);
    CHECK(std::abs(constraint_residual(sys, z)) < 1e-12);
  }
}

TEST_CASE("trajectory serialization") {
  HamiltonianSystem sys = free_special(1.0);
  PhasePoint z0 = on_shell_start(sys, {0.0, 0.0, 0.0, 0.0}, {0.2, 0.1, 0.0});
  IntegratorConfig cfg;
  cfg.step = 0.1;
  TrajectoryRecord rec = integrate(sys, z0, cfg, 0.5);

  std::ostringstream a, b;
  rec.write_csv(a);
  rec.write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("s,q0,q1,q2,q3,p0,p1,p2,p3,residual,hamiltonian", 0) == 0);

  std::string js = rec.to_json_string();
  CHECK(js.find("\"parameter\"") != std::string::npos);
  CHECK(js == rec.to_json_string());
}
