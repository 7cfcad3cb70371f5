#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "gqmech/errors.hpp"
#include "gqmech/evolve.hpp"

using namespace gqm;

namespace {
using Complex = ComplexGrid::Complex;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr Complex kI(0.0, 1.0);

QuantumOperator free_hamiltonian(double mass) {
  Mat a(1, 1);
  a(0, 0) = 1.0 / (2.0 * mass);
  return quadratic_operator(MatrixField::constant(a), {ScalarField::constant(1, 0.0)},
                            ScalarField::constant(1, 0.0));
}
}  // namespace

TEST_CASE("zero Hamiltonian leaves the state alone") {
  std::vector<Axis> axes = {{"x", -5.0, 5.0, 64}};
  ComplexGrid psi0 = gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {0.8}, {0.4});
  Mat zero(1, 1);
  QuantumOperator ham = quadratic_operator(MatrixField::constant(zero),
                                           {ScalarField::constant(1, 0.0)},
                                           ScalarField::constant(1, 0.0));
  EvolutionConfig cfg;
  cfg.dt = 0.05;
  cfg.steps = 20;
  cfg.record_every = 20;
  EvolutionRecord rec = schrodinger_evolve(ham, psi0, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi0.size(); ++i)
    worst = std::max(worst, std::abs(rec.snapshots.back()[i] - psi0[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("periodic plane wave accumulates the kinetic phase") {
  const double mass = 1.0;
  const int mode = 3;
  std::vector<Axis> axes = {{"x", 0.0, kTwoPi, 64}};
  ComplexGrid psi0 = make_grid(axes, Boundary::Periodic, [&](std::span<const double> x) {
    return std::exp(kI * static_cast<double>(mode) * x[0]);
  });
  EvolutionConfig cfg;
  cfg.dt = 0.002;
  cfg.steps = 500;
  cfg.record_every = 10;
  EvolutionRecord rec = schrodinger_evolve(free_hamiltonian(mass), psi0, cfg);

  // Phase rotation rate of the mode amplitude.
  Vec phases, times;
  for (std::size_t snap = 0; snap < rec.snapshots.size(); ++snap) {
    const ComplexGrid& g = rec.snapshots[snap];
    Complex amp(0.0, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      amp += g[i] * std::exp(-kI * static_cast<double>(mode) * g.coord(0, i));
    phases.push_back(std::arg(amp));
    times.push_back(rec.times[snap]);
  }
  Vec unwrapped = unwrap_phase(phases);
  double omega = -least_squares_slope(times, unwrapped);
  const double expect = 0.5 * mode * mode / mass;
  CHECK(std::abs(omega - expect) / expect < 0.02);  // O(h^2) spatial symbol error
}

TEST_CASE("schrodinger admission rejects a non-symmetric Hamiltonian") {
  std::vector<Axis> axes = {{"x", -5.0, 5.0, 64}};
  ComplexGrid psi0 = gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {0.8}, {0.0});
  Observable xp = Observable::affine({ScalarField::polynomial(Polynomial::variable(1, 0))},
                                     ScalarField::constant(1, 0.0));
  SchrodingerOptions raw;
  raw.half_density_correction = false;
  QuantumOperator bad = schrodinger_operator(xp, raw);
  EvolutionConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 5;
  CHECK_THROWS_AS(schrodinger_evolve(bad, psi0, cfg), NonSymmetricHamiltonian);
}

TEST_CASE("klein-gordon guards") {
  std::vector<Axis> axes = {{"x", 0.0, kTwoPi, 64}};
  WaveState s0;
  s0.psi = gaussian_packet(axes, Boundary::Periodic, {3.1}, {0.4}, {0.0});

  SUBCASE("missing time derivative") {
    EvolutionConfig cfg;
    CHECK_THROWS_AS(klein_gordon_evolve(s0, 1.0, cfg), Error);
  }

  SUBCASE("CFL violation") {
    s0.psi_t = s0.psi.like();
    EvolutionConfig cfg;
    cfg.dt = 2.0 * s0.psi.spacing(0);
    cfg.steps = 10;
    CHECK_THROWS_AS(klein_gordon_evolve(s0, 1.0, cfg), CFLViolation);
  }
}

TEST_CASE("zero initial data stays zero") {
  std::vector<Axis> axes = {{"x", 0.0, kTwoPi, 64}};
  WaveState s0;
  s0.psi = ComplexGrid(axes, Boundary::Periodic);
  s0.psi_t = s0.psi.like();
  EvolutionConfig cfg;
  cfg.dt = 0.04;
  cfg.steps = 50;
  cfg.record_every = 50;
  EvolutionRecord rec = klein_gordon_evolve(s0, 1.0, cfg);
  for (const auto& v : rec.snapshots.back().values()) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("massless pulse translates at unit speed") {
  const std::size_t n = 512;
  std::vector<Axis> axes = {{"x", 0.0, kTwoPi, n}};
  const double sigma = 0.4, center = 3.14159265358979;
  auto pulse = [&](double x) {
    double d = x - center;
    return std::exp(-d * d / (2.0 * sigma * sigma));
  };
  WaveState s0;
  s0.psi = make_grid(axes, Boundary::Periodic, [&](std::span<const double> x) {
    return Complex(pulse(x[0]), 0.0);
  });
  // Right-mover: psi_t = -psi_x.
  ComplexGrid psit = central_difference(s0.psi, 0);
  for (auto& v : psit.values()) v = -v;
  s0.psi_t = std::move(psit);

  EvolutionConfig cfg;
  cfg.dt = 0.5 * s0.psi.spacing(0);
  const double t_final = 1.0;
  cfg.steps = static_cast<std::size_t>(std::round(t_final / cfg.dt));
  cfg.record_every = cfg.steps;
  EvolutionRecord rec = klein_gordon_evolve(s0, 0.0, cfg);
  const ComplexGrid& last = rec.snapshots.back();
  const double t_end = rec.times.back();

  double err2 = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < last.size(); ++i) {
    double expect = pulse(std::fmod(last.coord(0, i) - t_end + kTwoPi, kTwoPi) + 0.0);
    err2 += std::norm(last[i] - Complex(expect, 0.0));
    ref2 += expect * expect;
  }
  CHECK(std::sqrt(err2 / ref2) < 0.01);
}

TEST_CASE("dispersion measurements") {
  Axis axis{"x", 0.0, kTwoPi, 128};

  SUBCASE("zero mode oscillates at the mass frequency") {
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    cfg.steps = 800;
    DispersionResult d = dispersion_check(0, 1.0, axis, cfg);
    // The leapfrog time shift m^3 dt^2/24 dominates the raw value; the
    // corrected value removes it, leaving only phase-fit contamination from
    // the Taylor start.
    CHECK(std::abs(d.omega_measured - 1.0) > 1e-6);
    CHECK(std::abs(d.omega_measured - 1.0) < 1e-4);
    CHECK(std::abs(d.omega_corrected - 1.0) < 1e-7);
    CHECK(std::abs(d.omega_corrected - 1.0) < 0.1 * std::abs(d.omega_measured - 1.0));
  }

  SUBCASE("low modes match the continuum relation") {
    EvolutionConfig cfg;
    cfg.dt = 0.5 * (kTwoPi / 128.0);
    cfg.steps = 300;
    for (int mode : {1, 2, 3}) {
      DispersionResult d = dispersion_check(mode, 1.0, axis, cfg);
      CHECK(d.rel_error < 0.01);
      CHECK(d.omega_analytic ==
            doctest::Approx(std::sqrt(1.0 + mode * mode)).epsilon(1e-12));
    }
  }

  SUBCASE("massless low modes travel at unit speed") {
    EvolutionConfig cfg;
    cfg.dt = 0.4 * (kTwoPi / 128.0);
    cfg.steps = 400;
    for (int mode : {1, 2}) {
      DispersionResult d = dispersion_check(mode, 0.0, axis, cfg);
      CHECK(std::abs(d.omega_measured - static_cast<double>(mode)) /
                static_cast<double>(mode) <
            0.01);
    }
  }

  SUBCASE("near the Nyquist limit the lattice dispersion shows") {
    Axis coarse{"x", 0.0, kTwoPi, 32};
    EvolutionConfig cfg;
    cfg.dt = 0.25 * (kTwoPi / 32.0);
    cfg.steps = 400;
    DispersionResult d = dispersion_check(15, 0.5, coarse, cfg);
    CHECK(d.rel_error > 0.02);  // documented lattice artifact, not an error
  }

  SUBCASE("runs that are too short are refused") {
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    cfg.steps = 4;
    CHECK_THROWS_AS(dispersion_check(1, 1.0, axis, cfg), InsufficientRunLength);
  }

  SUBCASE("modes beyond Nyquist are refused") {
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    cfg.steps = 100;
    CHECK_THROWS_AS(dispersion_check(100, 1.0, axis, cfg), Error);
  }
}

TEST_CASE("nonrelativistic limit entries scale like k^4") {
  Axis axis{"x", 0.0, kTwoPi, 512};
  EvolutionConfig cfg;
  cfg.dt = 0.5 * (kTwoPi / 512.0);
  cfg.steps = static_cast<std::size_t>(std::ceil(4.0 / cfg.dt));
  std::vector<int> modes = {0, 1, 2, 4};
  NonrelLimitReport rep = nonrel_limit_compare(modes, 10.0, axis, cfg);
  REQUIRE(rep.entries.size() == 4);
  // The zero mode has no dispersion: its deviation is pure phase-fit noise,
  // far below the first genuine k^4 term.
  CHECK(rep.entries[0].deviation < 1e-5);
  CHECK(rep.entries[0].deviation < 0.1 * rep.entries[1].deviation);
  CHECK(rep.slope == doctest::Approx(4.0).epsilon(0.08));
  for (std::size_t i = 1; i < rep.entries.size(); ++i) {
    CHECK(rep.entries[i].deviation / rep.entries[i].predicted > 0.8);
    CHECK(rep.entries[i].deviation / rep.entries[i].predicted < 1.25);
  }
}
