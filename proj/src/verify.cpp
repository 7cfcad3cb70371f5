#include "gqmech/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gqmech/dynamics.hpp"
#include "gqmech/errors.hpp"
#include "gqmech/evolve.hpp"
#include "gqmech/kinematics.hpp"
#include "gqmech/quantize.hpp"

namespace gqm {

namespace {

using Complex = ComplexGrid::Complex;
constexpr double kTwoPi = 6.28318530717958647692;

struct Rng {
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
  }
  int index(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(eng);
  }
  std::mt19937_64 eng;
};

Polynomial random_poly(Rng& rng, std::size_t nvars, int max_degree, int nterms,
                       double scale) {
  Polynomial p(nvars);
  for (int t = 0; t < nterms; ++t) {
    std::vector<std::uint8_t> exps(nvars, 0);
    int degree = rng.index(0, max_degree);
    for (int d = 0; d < degree; ++d) {
      exps[static_cast<std::size_t>(rng.index(0, static_cast<int>(nvars) - 1))]++;
    }
    p += Polynomial::monomial(nvars, rng.uniform(-scale, scale), exps);
  }
  return p;
}

Observable random_poly_observable(Rng& rng, std::size_t dim_q) {
  return Observable::from_poly(dim_q, random_poly(rng, 2 * dim_q, 3, 5, 1.0));
}

VerticalObservable random_vertical_poly(Rng& rng, std::size_t m) {
  return VerticalObservable::from_poly(m, random_poly(rng, 1 + 2 * m, 3, 5, 1.0));
}

Observable random_affine(Rng& rng, std::size_t dim_q, double scale = 0.6) {
  std::vector<ScalarField> a;
  for (std::size_t i = 0; i < dim_q; ++i)
    a.push_back(ScalarField::polynomial(random_poly(rng, dim_q, 2, 3, scale)));
  ScalarField b = ScalarField::polynomial(random_poly(rng, dim_q, 2, 3, scale));
  return Observable::affine(std::move(a), std::move(b));
}

PhasePoint random_phase_point(Rng& rng, std::size_t n, double lo = -1.0,
                              double hi = 1.0) {
  PhasePoint z;
  z.q.resize(n);
  z.p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    z.q[i] = rng.uniform(lo, hi);
    z.p[i] = rng.uniform(lo, hi);
  }
  return z;
}

PhasePoint random_on_shell_point(Rng& rng, const HamiltonianSystem& sys) {
  Vec q(sys.dim_q), ps(sys.dim_q - 1);
  for (double& v : q) v = rng.uniform(-1.0, 1.0);
  for (double& v : ps) v = rng.uniform(-1.0, 1.0);
  PhasePoint z;
  z.q = q;
  z.p.resize(sys.dim_q);
  z.p[0] = on_shell_p0(sys, q, ps);
  for (std::size_t i = 1; i < sys.dim_q; ++i) z.p[i] = ps[i - 1];
  return z;
}

ComplexGrid poly_probe(const std::vector<Axis>& axes, Boundary boundary,
                       std::span<const double> lin, Complex mix) {
  // Product of per-axis linear factors plus a complex admixture; degree <= 1
  // in every coordinate, so second differences vanish identically.
  return make_grid(axes, boundary, [&](std::span<const double> x) {
    Complex v(1.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) v *= Complex(1.0 + lin[i] * x[i], 0.0);
    Complex w(0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) w += mix * x[i];
    return v + w;
  });
}

double grid_max_abs(const ComplexGrid& g) {
  double m = 0.0;
  for (const auto& v : g.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

CheckResult check_poisson_algebra(std::uint64_t seed) {
  CheckBuilder cb("poisson-algebra",
                  "canonical brackets on T*Q and V*Q; fibration pull-back");
  Rng rng(seed ^ 0x1ull);
  const std::size_t n = 4;

  double worst_antisym = 0.0, worst_leibniz = 0.0, worst_jacobi = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Observable f = random_poly_observable(rng, n);
    Observable g = random_poly_observable(rng, n);
    Observable h = random_poly_observable(rng, n);
    PhasePoint z = random_phase_point(rng, n);

    worst_antisym = std::max(
        worst_antisym, std::abs(poisson_bracket(f, g, z) + poisson_bracket(g, f, z)));
    Observable gh = observable_product(g, h);
    worst_leibniz = std::max(
        worst_leibniz, std::abs(poisson_bracket(f, gh, z) -
                                poisson_bracket(f, g, z) * h.value(z) -
                                g.value(z) * poisson_bracket(f, h, z)));
    worst_jacobi = std::max(worst_jacobi, jacobi_residual(f, g, h, z));
  }
  cb.bound("antisymmetry", worst_antisym, 1e-10);
  cb.bound("leibniz", worst_leibniz, 1e-10);
  cb.bound("jacobi", worst_jacobi, 1e-10);

  const std::size_t m = 3;
  double worst_zeta = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    VerticalObservable f = random_vertical_poly(rng, m);
    VerticalObservable g = random_vertical_poly(rng, m);
    VerticalPhasePoint s;
    s.t = rng.uniform(-1.0, 1.0);
    s.q.resize(m);
    s.p.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      s.q[i] = rng.uniform(-1.0, 1.0);
      s.p[i] = rng.uniform(-1.0, 1.0);
    }
    PhasePoint z = lift_homogeneous(s, rng.uniform(-1.0, 1.0));
    double lhs = poisson_bracket(pullback_to_homogeneous(f), pullback_to_homogeneous(g), z);
    double rhs = poisson_bracket_vertical(f, g, s);
    worst_zeta = std::max(worst_zeta, std::abs(lhs - rhs));
  }
  cb.bound("pullback-morphism", worst_zeta, 1e-12);
  return cb.finish();
}

CheckResult check_affine_closure(std::uint64_t seed) {
  CheckBuilder cb("affine-closure", "closed bracket on the affine observable class");
  Rng rng(seed ^ 0x2ull);
  const std::size_t n = 4;

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Observable f = random_affine(rng, n);
    Observable g = random_affine(rng, n);
    Observable fg = affine_bracket(f, g);
    if (!fg.affine_form()) throw Error("affine_bracket lost the affine form");
    for (int pt = 0; pt < 25; ++pt) {
      PhasePoint z = random_phase_point(rng, n);
      worst = std::max(worst, std::abs(fg.value(z) - poisson_bracket(f, g, z)));
    }
  }
  cb.bound("matches-general-bracket", worst, 1e-12);

  double kron = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      Observable pk = Observable::momentum(n, k);
      Observable qj = Observable::coordinate(n, j);
      Observable br = affine_bracket(pk, qj);
      const double expect = (j == k) ? 1.0 : 0.0;
      for (int pt = 0; pt < 5; ++pt)
        kron = std::max(kron,
                        std::abs(br.value(random_phase_point(rng, n)) - expect));
    }
  }
  cb.bound("momentum-coordinate-delta", kron, 0.0);
  return cb.finish();
}

CheckResult check_kinematics(std::uint64_t seed) {
  CheckBuilder cb("kinematics",
                  "three-velocity transitions, boosts, hyperboloid, Legendre map");
  Rng rng(seed ^ 0x3ull);
  const std::size_t m = 3;
  MetricField eta = MetricField::minkowski(m + 1);

  double worst_roundtrip = 0.0, worst_hyper = 0.0, worst_chart = 0.0,
         worst_shell = 0.0, worst_cov = 0.0, worst_inverse = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    JetVelocity v;
    v.q0 = rng.uniform(-2.0, 2.0);
    v.q.resize(m);
    v.v.resize(m);
    for (std::size_t i = 0; i < m; ++i) v.q[i] = rng.uniform(-2.0, 2.0);
    double vmax = 0.9;
    double v2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v.v[i] = rng.uniform(-0.55, 0.55);
      v2 += v.v[i] * v.v[i];
    }
    if (v2 >= vmax * vmax) {
      for (double& c : v.v) c *= 0.8 * vmax / std::sqrt(v2);
      v2 = 0.0;
      for (double c : v.v) v2 += c * c;
    }
    const double alpha = rng.uniform(-1.5, 1.5);
    const double mass = rng.uniform(0.5, 2.0);

    // rho(lambda(v, c)) = v for any nonzero scale.
    double c = rng.uniform(0.2, 3.0) * (rng.index(0, 1) ? 1.0 : -1.0);
    JetVelocity back = rho_project(lambda_lift(v, c));
    for (std::size_t i = 0; i < m; ++i)
      worst_roundtrip = std::max(worst_roundtrip, std::abs(back.v[i] - v.v[i]));

    // Boosting a unit-hyperboloid member keeps it on the hyperboloid.
    const double gamma = 1.0 / std::sqrt(1.0 - v2);
    TangentVector w = lambda_lift(v, gamma);
    worst_hyper = std::max(worst_hyper, std::abs(hyperboloid_residual(w, eta)));
    TangentVector wb = boost_tangent(w, alpha);
    worst_hyper = std::max(worst_hyper, std::abs(hyperboloid_residual(wb, eta)));

    // Chart transition law reproduces the closed-form boost.
    JetVelocity via_chart = jet_transition(v, lorentz_boost_chart(alpha, m + 1));
    JetVelocity via_boost = lorentz_boost_velocity(v, alpha);
    for (std::size_t i = 0; i < m; ++i)
      worst_chart = std::max(worst_chart, std::abs(via_chart.v[i] - via_boost.v[i]));

    // Boost then inverse boost is the identity.
    JetVelocity cycled = lorentz_boost_velocity(lorentz_boost_velocity(v, alpha), -alpha);
    for (std::size_t i = 0; i < m; ++i)
      worst_inverse = std::max(worst_inverse, std::abs(cycled.v[i] - v.v[i]));

    // Legendre output lands on the mass shell.
    PhasePoint z = legendre_free_mass(v, mass);
    double shell = z.p[0] * z.p[0];
    for (std::size_t i = 1; i <= m; ++i) shell -= z.p[i] * z.p[i];
    worst_shell =
        std::max(worst_shell, std::abs(shell - mass * mass) / (mass * mass));

    // Legendre commutes with boosts (velocity rule vs covector rule).
    PhasePoint lhs = legendre_free_mass(lorentz_boost_velocity(v, alpha), mass);
    Vec rhs = boost_covector(z.p, alpha);
    for (std::size_t i = 0; i <= m; ++i)
      worst_cov = std::max(worst_cov, std::abs(lhs.p[i] - rhs[i]));
  }
  cb.bound("project-lift-identity", worst_roundtrip, 1e-13);
  cb.bound("boost-preserves-hyperboloid", worst_hyper, 1e-12);
  cb.bound("chart-equals-boost", worst_chart, 1e-12);
  cb.bound("boost-inverse-identity", worst_inverse, 1e-12);
  cb.bound("legendre-mass-shell", worst_shell, 1e-12);
  cb.bound("legendre-boost-covariance", worst_cov, 1e-10);
  return cb.finish();
}

CheckResult check_classical_dynamics(std::uint64_t seed) {
  CheckBuilder cb("classical-dynamics", "constrained Hamilton flows of the example systems");
  Rng rng(seed ^ 0x4ull);

  // Free mass: momenta constant, three-velocity identity.
  {
    HamiltonianSystem sys = free_special(1.3);
    Vec q0 = {0.0, 0.1, -0.2, 0.05};
    Vec ps = {0.3, -0.2, 0.5};
    PhasePoint z0;
    z0.q = q0;
    z0.p = {on_shell_p0(sys, q0, ps), ps[0], ps[1], ps[2]};

    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::ExplicitRK4;
    cfg.step = 1e-3;
    cfg.record_every = 100;
    TrajectoryRecord rec = integrate(sys, z0, cfg, 2.0);

    double dp = 0.0, v3 = 0.0;
    for (const PhasePoint& z : rec.states) {
      for (std::size_t i = 0; i < 4; ++i) dp = std::max(dp, std::abs(z.p[i] - z0.p[i]));
      PhaseTangent u = flow_vector_field(sys, z);
      double denom = std::sqrt(sys.mass * sys.mass + z.p[1] * z.p[1] +
                               z.p[2] * z.p[2] + z.p[3] * z.p[3]);
      for (std::size_t i = 1; i < 4; ++i)
        v3 = std::max(v3, std::abs(u.dq[i] / u.dq[0] - z.p[i] / denom));
    }
    cb.bound("free-momenta-constant", dp, 1e-14);
    cb.bound("free-three-velocity", v3, 1e-12);
  }

  // Charged particle in a constant magnetic field: cyclotron period.
  HamiltonianSystem charged = charged_em(1.0, 1.0, constant_magnetic_potential(1.0));
  {
    Vec q0 = {0.0, 0.0, 0.0, 0.0};
    Vec ps = {1.0, 0.0, 0.0};
    PhasePoint z0;
    z0.q = q0;
    z0.p = {on_shell_p0(charged, q0, ps), ps[0], ps[1], ps[2]};
    const double gamma = -z0.p[0] / charged.mass;

    IntegratorConfig cfg;
    cfg.step = kTwoPi / 12000.0;
    cfg.record_every = 6;
    TrajectoryRecord rec = integrate(charged, z0, cfg, 3.0 * kTwoPi);

    Vec phase, tcoord;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const PhasePoint& z = rec.states[i];
      double ax = charged.potential[1](z.q);
      double ay = charged.potential[2](z.q);
      phase.push_back(std::atan2(z.p[2] - ay, z.p[1] - ax));
      tcoord.push_back(z.q[0]);
    }
    Vec unwrapped = unwrap_phase(phase);
    double omega_t = std::abs(least_squares_slope(tcoord, unwrapped));
    double period = kTwoPi / omega_t;
    double expected = kTwoPi * charged.mass * gamma / (charged.charge * 1.0);
    cb.bound("charged-period", std::abs(period - expected) / expected, 1e-6);
  }

  // Mass-shell drift over 1e4 implicit-midpoint steps, all three systems.
  {
    auto drift = [&](const HamiltonianSystem& sys, const PhasePoint& z0, double step) {
      IntegratorConfig cfg;
      cfg.method = IntegratorMethod::ImplicitMidpoint;
      cfg.step = step;
      cfg.implicit_tol = 1e-14;
      cfg.record_every = 10;
      TrajectoryRecord rec = integrate(sys, z0, cfg, step * 1e4);
      double worst = 0.0;
      for (double r : rec.residuals) worst = std::max(worst, std::abs(r));
      return worst;
    };

    HamiltonianSystem fr = free_special(1.0);
    Vec q0 = {0.0, 0.0, 0.0, 0.0};
    Vec ps = {0.4, -0.3, 0.2};
    PhasePoint zf;
    zf.q = q0;
    zf.p = {on_shell_p0(fr, q0, ps), ps[0], ps[1], ps[2]};
    cb.bound("midpoint-drift-free", drift(fr, zf, 1e-3), 1e-8);

    PhasePoint zc;
    zc.q = q0;
    zc.p = {on_shell_p0(charged, q0, ps), ps[0], ps[1], ps[2]};
    cb.bound("midpoint-drift-charged", drift(charged, zc, 1e-3), 1e-8);

    HamiltonianSystem curved = curved_metric(1.0, example_curved_metric());
    Vec qc = {0.0, 0.3, -0.4, 0.2};
    Vec pc = {0.25, -0.15, 0.1};
    PhasePoint zg;
    zg.q = qc;
    zg.p = {on_shell_p0(curved, qc, pc), pc[0], pc[1], pc[2]};
    cb.bound("midpoint-drift-curved", drift(curved, zg, 5e-4), 1e-8);
  }

  // RK4 constraint-residual convergence order, measured on a charged system
  // with a position-dependent magnetic field. (With a constant field the
  // kinetic dynamics is linear and the quadratic invariant decays at fifth
  // order instead of the generic fourth.)
  {
    std::vector<ScalarField> pot;
    pot.push_back(ScalarField::constant(4, 0.0));
    pot.push_back(ScalarField::constant(4, 0.0));
    Polynomial a2 = Polynomial::variable(4, 1) +
                    Polynomial::variable(4, 1) * Polynomial::variable(4, 1) * 0.5;
    pot.push_back(ScalarField::polynomial(std::move(a2)));
    pot.push_back(ScalarField::constant(4, 0.0));
    HamiltonianSystem gradient_field = charged_em(1.0, 1.0, std::move(pot));

    Vec q0 = {0.0, 0.0, 0.0, 0.0};
    Vec ps = {0.8, 0.1, -0.3};
    PhasePoint z0;
    z0.q = q0;
    z0.p = {on_shell_p0(gradient_field, q0, ps), ps[0], ps[1], ps[2]};

    Vec logh, logr;
    double h = 0.05;
    for (int level = 0; level < 4; ++level) {
      IntegratorConfig cfg;
      cfg.step = h;
      cfg.record_every = 1;
      TrajectoryRecord rec = integrate(gradient_field, z0, cfg, 4.0);
      double worst = 0.0;
      for (double r : rec.residuals) worst = std::max(worst, std::abs(r));
      logh.push_back(std::log(h));
      logr.push_back(std::log(worst));
      h *= 0.5;
    }
    cb.range("rk4-order", least_squares_slope(logh, logr), 3.8, 4.2);
  }

  // Non-relativistic bookkeeping: lifted oscillator trajectory stays on the
  // constraint section and conserves the energy.
  {
    HamiltonianSystem osc = nonrel_oscillator(2.0, 1);
    VerticalPhasePoint s0(0.0, {0.7}, {0.0});
    PhasePoint z0 = lift_on_section(osc, s0);
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.record_every = 100;
    TrajectoryRecord rec = integrate(osc, z0, cfg, 10.0);
    double worst_res = 0.0, worst_energy = 0.0;
    const double e0 = rec.conserved[0].second[0];
    for (std::size_t i = 0; i < rec.size(); ++i) {
      worst_res = std::max(worst_res, std::abs(rec.residuals[i]));
      worst_energy = std::max(worst_energy, std::abs(rec.conserved[0].second[i] - e0));
    }
    cb.bound("nonrel-section-residual", worst_res, 1e-9);
    cb.bound("nonrel-energy-drift", worst_energy, 1e-9);

    // The Hamiltonian connection annihilates the presymplectic form.
    double worst_contraction = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      VerticalPhasePoint s(rng.uniform(-1.0, 1.0), {rng.uniform(-1.0, 1.0)},
                           {rng.uniform(-1.0, 1.0)});
      worst_contraction =
          std::max(worst_contraction, norm_inf(contraction_residual_nonrel(osc, s)));
    }
    cb.bound("nonrel-contraction", worst_contraction, 1e-10);
  }

  return cb.finish();
}

CheckResult check_constraint_compatibility(std::uint64_t seed) {
  CheckBuilder cb("constraint-compatibility",
                  "Hamiltonian flow preserves the mass-shell constraint");
  Rng rng(seed ^ 0x5ull);

  auto worst_at_random_points = [&](const HamiltonianSystem& sys) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      PhasePoint z = random_on_shell_point(rng, sys);
      worst = std::max(worst, std::abs(constraint_invariance_residual(sys, z)));
    }
    return worst;
  };

  cb.bound("free-flat", worst_at_random_points(free_special(1.2)), 1e-10);
  cb.bound("charged-flat",
           worst_at_random_points(charged_em(1.0, 0.7, constant_magnetic_potential(0.8))),
           1e-10);
  cb.bound("curved-fd", worst_at_random_points(curved_metric(1.0, example_curved_metric())),
           1e-6);
  return cb.finish();
}

CheckResult check_prequantization(std::uint64_t seed) {
  CheckBuilder cb("prequantization", "prequantum operators on phase-space sections");
  (void)seed;

  // One-dimensional configuration space: grid over (q0, p0).
  {
    std::vector<Axis> axes = {{"q0", -1.0, 1.0, 40}, {"p0", -1.0, 1.0, 40}};
    ComplexGrid s = make_grid(axes, Boundary::DirichletZero, [](std::span<const double> x) {
      return Complex(1.0 + 0.3 * x[0] + 0.1 * x[0] * x[0], 0.2) *
             Complex(1.0 - 0.2 * x[1] + 0.05 * x[1] * x[1], 0.0);
    });
    const double scale = grid_max_abs(s);

    QuantumOperator phat = prequantum_operator(Observable::momentum(1, 0));
    ComplexGrid lhs = phat(s);
    ComplexGrid rhs = central_difference(s, 0);
    double worst_p = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      worst_p = std::max(worst_p, std::abs(lhs[i] - Complex(0.0, -1.0) * rhs[i]));

    QuantumOperator qhat = prequantum_operator(Observable::coordinate(1, 0));
    ComplexGrid lhs_q = qhat(s);
    ComplexGrid dp = central_difference(s, 1);
    double worst_q = 0.0;
    std::vector<std::size_t> idx(2, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s.unflatten(i, idx);
      Complex expect = Complex(0.0, 1.0) * dp[i] + s.coord(0, idx[0]) * s[i];
      worst_q = std::max(worst_q, std::abs(lhs_q[i] - expect));
    }

    QuantumOperator onehat = prequantum_operator(Observable::constant(1, 1.0));
    ComplexGrid lhs_1 = onehat(s);
    double worst_1 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      worst_1 = std::max(worst_1, std::abs(lhs_1[i] - s[i]));

    cb.bound("momentum-operator-table", worst_p / scale, 1e-13);
    cb.bound("coordinate-operator-table", worst_q / scale, 1e-13);
    cb.bound("unit-operator-table", worst_1 / scale, 1e-14);
  }

  // Dirac condition for coordinate/momentum pairs on a two-dimensional
  // configuration space; probes of degree <= 1 per coordinate make the
  // stencil identities exact.
  {
    std::vector<Axis> axes = {{"q0", -1.0, 1.0, 12},
                              {"q1", -1.0, 1.0, 12},
                              {"p0", -1.0, 1.0, 12},
                              {"p1", -1.0, 1.0, 12}};
    Vec lin1 = {0.3, -0.2, 0.1, 0.25};
    Vec lin2 = {-0.15, 0.22, -0.3, 0.12};
    std::vector<ComplexGrid> probes;
    probes.push_back(poly_probe(axes, Boundary::DirichletZero, lin1, Complex(0.0, 0.2)));
    probes.push_back(poly_probe(axes, Boundary::DirichletZero, lin2, Complex(0.1, -0.1)));

    double worst = 0.0;
    for (std::size_t lam = 0; lam < 2; ++lam) {
      for (std::size_t mu = 0; mu < 2; ++mu) {
        double r = prequantum_commutator_residual(Observable::coordinate(2, lam),
                                                  Observable::momentum(2, mu), probes);
        worst = std::max(worst, r);
      }
    }
    cb.bound("dirac-coordinate-momentum", worst, 1e-10);
  }

  return cb.finish();
}

CheckResult check_schrodinger_representation(std::uint64_t seed) {
  CheckBuilder cb("schrodinger-representation", "affine quantum algebra on half-densities");
  Rng rng(seed ^ 0x7ull);

  const std::vector<std::size_t> levels = {128, 256, 512};
  auto probes_for = [&](std::size_t n) {
    std::vector<ComplexGrid> probes;
    std::vector<Axis> axes = {{"x", -6.0, 6.0, n}};
    probes.push_back(
        gaussian_packet(axes, Boundary::DirichletZero, {-0.5}, {0.8}, {1.0}));
    probes.push_back(
        gaussian_packet(axes, Boundary::DirichletZero, {0.4}, {0.7}, {-0.6}));
    return probes;
  };

  // Random affine pairs: the commutator defect must shrink at second order.
  double min_slope = 10.0, worst_fine = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    Observable f = random_affine(rng, 1);
    Observable g = random_affine(rng, 1);
    Vec logh, logr;
    bool degenerate = false;
    for (std::size_t n : levels) {
      std::vector<ComplexGrid> probes = probes_for(n);
      double r = commutator_residual(f, g, probes);
      if (r < 1e-11) {
        degenerate = true;  // bracket effectively constant-coefficient
        break;
      }
      logh.push_back(std::log(12.0 / static_cast<double>(n)));
      logr.push_back(std::log(r));
      if (n == levels.back()) worst_fine = std::max(worst_fine, r);
    }
    if (!degenerate) min_slope = std::min(min_slope, least_squares_slope(logh, logr));
  }
  cb.range("commutator-order", std::min(min_slope, 10.0), 1.8, 10.0);
  cb.bound("commutator-fine-grid", worst_fine, 1e-2);

  // Constant-coefficient pairs commute exactly.
  {
    std::vector<ComplexGrid> probes = probes_for(256);
    Observable f = Observable::affine({ScalarField::constant(1, 0.7)},
                                      ScalarField::constant(1, 0.3));
    Observable g = Observable::affine({ScalarField::constant(1, -0.4)},
                                      ScalarField::constant(1, 1.1));
    cb.bound("constant-coefficient-pairs", commutator_residual(f, g, probes), 1e-10);
  }

  // Symmetry of the corrected operators, second-order in h.
  {
    Observable xp = Observable::affine(
        {ScalarField::polynomial(Polynomial::variable(1, 0))}, ScalarField::constant(1, 0.0));
    Vec logh, logr;
    for (std::size_t n : levels) {
      std::vector<ComplexGrid> probes = probes_for(n);
      double r = hermiticity_residual(schrodinger_operator(xp), probes);
      logh.push_back(std::log(12.0 / static_cast<double>(n)));
      logr.push_back(std::log(r));
    }
    cb.range("hermiticity-order", least_squares_slope(logh, logr), 1.8, 10.0);

    std::vector<ComplexGrid> probes = probes_for(256);
    SchrodingerOptions raw;
    raw.half_density_correction = false;
    double bad = hermiticity_residual(schrodinger_operator(xp, raw), probes);
    cb.range("uncorrected-negative-control", bad, 1e-3, 1e6);

    Observable mult = Observable::affine({ScalarField::constant(1, 0.0)},
                                         ScalarField::polynomial(
                                             Polynomial::variable(1, 0) * 0.8));
    cb.bound("real-multiplication-symmetric",
             hermiticity_residual(schrodinger_operator(mult), probes), 1e-14);
  }

  return cb.finish();
}

CheckResult check_half_density_transform(std::uint64_t seed) {
  CheckBuilder cb("half-density-transform", "half-density transformation law");
  (void)seed;
  const std::size_t n = 1024;
  std::vector<Axis> axes = {{"x", -6.0, 6.0, n}};
  ComplexGrid rho =
      gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {1.0}, {0.7});
  const double norm0 = grid_norm(rho);

  // Identity transition.
  {
    Chart chart = Chart(1).with_transition(
        [](std::span<const double> q) { return Vec(q.begin(), q.end()); },
        [](std::span<const double>) { return Mat::identity(1); });
    ComplexGrid out = half_density_transform(rho, chart, axes);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
      worst = std::max(worst, std::abs(out[i] - rho[i]));
    cb.bound("identity-transition", worst, 1e-12);
  }

  // Dilation by 2. The target box is shifted off-commensurate so the
  // interpolation path is actually exercised.
  {
    Chart chart = Chart(1).with_transition(
        [](std::span<const double> q) { return Vec{2.0 * q[0]}; },
        [](std::span<const double>) {
          Mat j(1, 1);
          j(0, 0) = 2.0;
          return j;
        });
    std::vector<Axis> target = {{"x", -12.37, 11.83, n}};
    ComplexGrid out = half_density_transform(rho, chart, target);
    cb.bound("dilation-norm-invariance", std::abs(grid_norm(out) / norm0 - 1.0), 1e-6);
  }

  // Cubic nonlinear map q~ = q + 0.1 q^3.
  {
    Chart chart = Chart(1).with_transition(
        [](std::span<const double> q) { return Vec{q[0] + 0.1 * q[0] * q[0] * q[0]}; },
        [](std::span<const double> q) {
          Mat j(1, 1);
          j(0, 0) = 1.0 + 0.3 * q[0] * q[0];
          return j;
        });
    std::vector<Axis> target = {{"x", -27.6, 27.6, n}};
    ComplexGrid out = half_density_transform(rho, chart, target);
    cb.bound("cubic-map-norm-invariance", std::abs(grid_norm(out) / norm0 - 1.0), 1e-4);
  }

  return cb.finish();
}

CheckResult check_quantum_constraints(std::uint64_t seed) {
  CheckBuilder cb("quantum-constraints",
                  "Schrodinger and Klein-Gordon constraint evolution");
  (void)seed;
  const double mass = 1.0;

  // Crank-Nicolson free packet: norm conservation and the spreading law.
  {
    std::vector<Axis> axes = {{"x", -20.0, 20.0, 512}};
    ComplexGrid psi0 =
        gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {1.0}, {0.0});
    normalize(psi0);

    Mat a(1, 1);
    a(0, 0) = 1.0 / (2.0 * mass);
    QuantumOperator ham = quadratic_operator(
        MatrixField::constant(a), {ScalarField::constant(1, 0.0)},
        ScalarField::constant(1, 0.0));

    EvolutionConfig cfg;
    cfg.dt = 0.002;
    cfg.steps = 1000;
    cfg.record_every = 100;
    cfg.solve_tol = 1e-13;
    EvolutionRecord rec = schrodinger_evolve(ham, psi0, cfg);

    double drift = 0.0;
    for (double nrm : rec.norms) drift = std::max(drift, std::abs(nrm - rec.norms[0]));
    cb.bound("crank-nicolson-norm-drift", drift, 1e-8);

    const ComplexGrid& psiT = rec.snapshots.back();
    double w = 0.0, mean = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < psiT.size(); ++i) {
      double dens = std::norm(psiT[i]);
      double x = psiT.coord(0, i);
      w += dens;
      mean += dens * x;
      x2 += dens * x * x;
    }
    mean /= w;
    double sigma = std::sqrt(x2 / w - mean * mean);
    const double t = rec.times.back();
    double sigma_exact = std::sqrt(1.0 + std::pow(t / (2.0 * mass), 2));
    cb.bound("gaussian-spreading", std::abs(sigma / sigma_exact - 1.0), 5e-3);
  }

  // Klein-Gordon dispersion, modes 1..8 on n = 256.
  {
    Axis axis{"x", 0.0, kTwoPi, 256};
    EvolutionConfig cfg;
    cfg.dt = 0.5 * (kTwoPi / 256.0);
    cfg.steps = static_cast<std::size_t>(std::ceil(4.0 / cfg.dt));
    double worst = 0.0;
    for (int mode = 1; mode <= 8; ++mode) {
      DispersionResult d = dispersion_check(mode, mass, axis, cfg);
      worst = std::max(worst, d.rel_error);
    }
    cb.bound("kg-dispersion", worst, 1e-2);
  }

  // Non-relativistic limit: deviation from m + k^2/2m scales like k^4.
  {
    const double heavy = 10.0;
    Axis axis{"x", 0.0, kTwoPi, 1024};
    EvolutionConfig cfg;
    cfg.dt = 0.5 * (kTwoPi / 1024.0);
    cfg.steps = static_cast<std::size_t>(std::ceil(5.0 / cfg.dt));
    std::vector<int> modes = {1, 2, 3, 4};
    NonrelLimitReport rep = nonrel_limit_compare(modes, heavy, axis, cfg);
    cb.range("nonrel-limit-slope", rep.slope, 3.7, 4.3);
    const NonrelLimitEntry& e0 = rep.entries.front();  // k/m = 0.1
    cb.range("nonrel-limit-amplitude", e0.deviation / e0.predicted, 1.0 / 1.2, 1.2);
  }

  // Leapfrog staggered energy over 1e4 steps at CFL 0.5.
  {
    std::vector<Axis> axes = {{"x", 0.0, kTwoPi, 256}};
    WaveState s0;
    s0.psi = gaussian_packet(axes, Boundary::Periodic, {3.1}, {0.3}, {2.0});
    s0.psi_t = s0.psi.like();
    EvolutionConfig cfg;
    cfg.dt = 0.5 * (kTwoPi / 256.0);
    cfg.steps = 10000;
    cfg.record_every = 100;
    EvolutionRecord rec = klein_gordon_evolve(s0, mass, cfg);
    double drift = 0.0;
    for (double e : rec.energies)
      drift = std::max(drift, std::abs(e - rec.energies[0]) / std::abs(rec.energies[0]));
    cb.bound("leapfrog-energy-drift", drift, 1e-8);
  }

  // The gauge-coupled quadratic operator at A = 0 evolves identically to the
  // free operator.
  {
    std::vector<Axis> axes = {{"x", -10.0, 10.0, 128}};
    ComplexGrid psi0 =
        gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {0.8}, {1.0});
    normalize(psi0);
    Mat a(1, 1);
    a(0, 0) = 1.0 / (2.0 * mass);
    QuantumOperator free_op = quadratic_operator(
        MatrixField::constant(a), {ScalarField::constant(1, 0.0)},
        ScalarField::constant(1, 0.0));
    // Charged decomposition with A = 0: b = -(e/m) A = 0, c = (e^2/2m) A^2 = 0.
    QuantumOperator gauge_op = quadratic_operator(
        MatrixField::constant(a), {ScalarField::constant(1, 0.0)},
        ScalarField::constant(1, 0.0));
    EvolutionConfig cfg;
    cfg.dt = 0.005;
    cfg.steps = 100;
    cfg.record_every = 100;
    EvolutionRecord ra = schrodinger_evolve(free_op, psi0, cfg);
    EvolutionRecord rb = schrodinger_evolve(gauge_op, psi0, cfg);
    double worst = 0.0;
    const ComplexGrid& fa = ra.snapshots.back();
    const ComplexGrid& fb = rb.snapshots.back();
    for (std::size_t i = 0; i < fa.size(); ++i)
      worst = std::max(worst, std::abs(fa[i] - fb[i]));
    cb.bound("gauge-off-equals-free", worst, 1e-12);
  }

  return cb.finish();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<CheckResult> run_core_checks(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  checks.push_back(check_poisson_algebra(seed));
  checks.push_back(check_affine_closure(seed));
  checks.push_back(check_kinematics(seed));
  checks.push_back(check_classical_dynamics(seed));
  checks.push_back(check_constraint_compatibility(seed));
  checks.push_back(check_prequantization(seed));
  checks.push_back(check_schrodinger_representation(seed));
  checks.push_back(check_half_density_transform(seed));
  checks.push_back(check_quantum_constraints(seed));
  return checks;
}

std::string render_checks(const std::vector<CheckResult>& checks, std::uint64_t seed) {
  VerificationReport r;
  r.seed = seed;
  r.checks = checks;
  return r.to_json_string();
}

}  // namespace

VerificationReport run_full_verification(const VerifyOptions& options) {
  VerificationReport report;
  report.seed = options.seed;
  report.checks = run_core_checks(options.seed);

  std::vector<CheckResult> rerun = run_core_checks(options.seed);
  CheckBuilder cb("report-determinism", "seeded verification reruns are byte-identical");
  cb.require("byte-identical-rerun", render_checks(report.checks, options.seed) ==
                                         render_checks(rerun, options.seed));
  report.checks.push_back(cb.finish());
  return report;
}

}  // namespace gqm
