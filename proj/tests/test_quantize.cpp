#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "gqmech/errors.hpp"
#include "gqmech/quantize.hpp"

using namespace gqm;

namespace {
using Complex = ComplexGrid::Complex;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr Complex kI(0.0, 1.0);

double max_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("grid layout conventions") {
  ComplexGrid periodic({{"x", 0.0, 1.0, 10}}, Boundary::Periodic);
  CHECK(periodic.spacing(0) == doctest::Approx(0.1));
  CHECK(periodic.coord(0, 0) == 0.0);
  CHECK(periodic.coord(0, 9) == doctest::Approx(0.9));

  ComplexGrid dirichlet({{"x", 0.0, 1.0, 9}}, Boundary::DirichletZero);
  CHECK(dirichlet.spacing(0) == doctest::Approx(0.1));
  CHECK(dirichlet.coord(0, 0) == doctest::Approx(0.1));
  CHECK(dirichlet.coord(0, 8) == doctest::Approx(0.9));

  // Wrap vs zero fill.
  for (std::size_t i = 0; i < 10; ++i) periodic[i] = static_cast<double>(i);
  std::vector<std::size_t> idx = {0};
  CHECK(periodic.shifted(idx, 0, 0, -1) == Complex(9.0, 0.0));
  for (std::size_t i = 0; i < 9; ++i) dirichlet[i] = static_cast<double>(i + 1);
  CHECK(dirichlet.shifted(idx, 0, 0, -1) == Complex(0.0, 0.0));
}

TEST_CASE("schrodinger operator of a momentum on a plane wave") {
  const double k = 5.0;
  Observable p = Observable::momentum(1, 0);
  for (std::size_t n : {128u, 256u}) {
    ComplexGrid psi = make_grid({{"x", 0.0, kTwoPi, n}}, Boundary::Periodic,
                                [&](std::span<const double> x) {
                                  return std::exp(kI * k * x[0]);
                                });
    ComplexGrid out = schrodinger_operator(p)(psi);
    const double h = psi.spacing(0);
    const double k_eff = std::sin(k * h) / h;  // central-difference symbol
    double worst = 0.0, worst_exact = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      worst = std::max(worst, std::abs(out[i] - k * psi[i]));
      worst_exact = std::max(worst_exact, std::abs(out[i] - k_eff * psi[i]));
    }
    CHECK(worst_exact < 1e-12);
    CHECK(worst < 1.05 * std::abs(k - k_eff));
    CHECK(worst < 1.05 * k * k * k * h * h / 6.0);
  }
}

TEST_CASE("dilation operator x p and plain multiplication") {
  std::vector<Axis> axes = {{"x", -4.0, 4.0, 200}};
  ComplexGrid psi = gaussian_packet(axes, Boundary::DirichletZero, {0.3}, {0.8}, {1.2});

  Observable xp = Observable::affine({ScalarField::polynomial(Polynomial::variable(1, 0))},
                                     ScalarField::constant(1, 0.0));
  ComplexGrid lhs = schrodinger_operator(xp)(psi);
  ComplexGrid d = central_difference(psi, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    Complex expect = -kI * psi.coord(0, i) * d[i] - kI * 0.5 * psi[i];
    worst = std::max(worst, std::abs(lhs[i] - expect));
  }
  CHECK(worst < 1e-14);

  Observable mult = Observable::affine({ScalarField::constant(1, 0.0)},
                                       ScalarField::polynomial(
                                           Polynomial::variable(1, 0) * 0.5));
  ComplexGrid mout = schrodinger_operator(mult)(psi);
  worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    worst = std::max(worst, std::abs(mout[i] - 0.5 * psi.coord(0, i) * psi[i]));
  CHECK(worst == 0.0);

  Polynomial quad = Polynomial::variable(2, 1) * Polynomial::variable(2, 1);
  CHECK_THROWS_AS(schrodinger_operator(Observable::from_poly(1, quad)), QuadraticRequired);
}

TEST_CASE("quadratic operator") {
  const double m = 1.3;
  Mat a(1, 1);
  a(0, 0) = 1.0 / (2.0 * m);

  SUBCASE("constant coefficients reduce to the plain Laplacian") {
    std::vector<Axis> axes = {{"x", -5.0, 5.0, 128}};
    ComplexGrid psi = gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {1.0}, {0.7});
    ComplexGrid out = quadratic_operator(MatrixField::constant(a),
                                         {ScalarField::constant(1, 0.0)},
                                         ScalarField::constant(1, 0.0))(psi);
    ComplexGrid lap = second_difference(psi, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
      worst = std::max(worst, std::abs(out[i] + lap[i] / (2.0 * m)));
    CHECK(worst < 1e-13);
  }

  SUBCASE("zero quadratic part reduces to the affine operator") {
    std::vector<Axis> axes = {{"x", -5.0, 5.0, 96}};
    ComplexGrid psi = gaussian_packet(axes, Boundary::DirichletZero, {0.2}, {0.9}, {0.0});
    Mat zero(1, 1);
    std::vector<ScalarField> b = {ScalarField::polynomial(Polynomial::variable(1, 0))};
    ScalarField c = ScalarField::constant(1, 0.7);
    ComplexGrid viaq = quadratic_operator(MatrixField::constant(zero), b, c)(psi);
    ComplexGrid direct = schrodinger_operator(Observable::affine(b, c))(psi);
    CHECK(max_diff(viaq, direct) < 1e-15);
  }

  SUBCASE("asymmetric coefficients are rejected") {
    Mat bad(2, 2);
    bad(0, 1) = 1.0;
    std::vector<ScalarField> b(2, ScalarField::constant(2, 0.0));
    QuantumOperator op = quadratic_operator(MatrixField::constant(bad), b,
                                            ScalarField::constant(2, 0.0));
    ComplexGrid psi({{"q0", -1.0, 1.0, 8}, {"q1", -1.0, 1.0, 8}}, Boundary::DirichletZero);
    CHECK_THROWS_AS(op(psi), Error);
  }

  SUBCASE("corrected momentum operator is symmetric") {
    std::vector<Axis> axes = {{"x", -6.0, 6.0, 128}};
    std::vector<ComplexGrid> probes;
    probes.push_back(gaussian_packet(axes, Boundary::DirichletZero, {-0.3}, {0.8}, {0.9}));
    probes.push_back(gaussian_packet(axes, Boundary::DirichletZero, {0.6}, {0.7}, {-0.4}));
    CHECK(hermiticity_residual(schrodinger_operator(Observable::momentum(1, 0)), probes) <
          1e-13);
  }

  SUBCASE("divergence form is symmetric for variable coefficients") {
    std::vector<Axis> axes = {{"x", -5.0, 5.0, 128}};
    std::vector<ComplexGrid> probes;
    probes.push_back(gaussian_packet(axes, Boundary::DirichletZero, {-0.4}, {0.7}, {1.0}));
    probes.push_back(gaussian_packet(axes, Boundary::DirichletZero, {0.5}, {0.6}, {-0.8}));
    Polynomial coeff =
        Polynomial::constant(1, 0.6) +
        Polynomial::variable(1, 0) * Polynomial::variable(1, 0) * 0.02;
    QuantumOperator op = quadratic_operator(
        MatrixField::diagonal({ScalarField::polynomial(coeff)}),
        {ScalarField::constant(1, 0.0)}, ScalarField::constant(1, 0.0));
    CHECK(hermiticity_residual(op, probes) < 1e-13);
  }
}

TEST_CASE("gauge-coupled expansion matches covariant composition") {
  // H = (1/2m)(d - i e A)(d - i e A) on one coordinate with eta = (+1),
  // versus the quadratic+affine+scalar decomposition of the classical
  // Hamiltonian -(1/2m)(p - eA)^2. The stencil compositions differ at
  // O(h^2); past n ~ 2^17 the composed 1/h^2 differences hit the roundoff
  // floor, so the fine comparison sits just before it.
  const double m = 1.0, e = 0.5;
  auto a_field = [](double x) { return 0.05 * x + 0.02 * x * x; };

  auto run = [&](std::size_t n) {
    std::vector<Axis> axes = {{"x", -20.0, 20.0, n}};
    ComplexGrid psi = gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {2.5}, {0.3});

    Polynomial apoly = Polynomial::variable(1, 0) * 0.05 +
                       Polynomial::variable(1, 0) * Polynomial::variable(1, 0) * 0.02;
    std::vector<ScalarField> b = {ScalarField::polynomial(apoly * (e / m))};
    ScalarField c = ScalarField::polynomial(apoly * apoly * (-e * e / (2.0 * m)));
    Mat quad(1, 1);
    quad(0, 0) = -1.0 / (2.0 * m);
    ComplexGrid expansion = quadratic_operator(MatrixField::constant(quad), b, c)(psi);

    // Independent composition of covariant derivatives.
    auto cov = [&](const ComplexGrid& g) {
      ComplexGrid out = central_difference(g, 0);
      for (std::size_t i = 0; i < g.size(); ++i)
        out[i] -= kI * e * a_field(g.coord(0, i)) * g[i];
      return out;
    };
    ComplexGrid direct = cov(cov(psi));
    for (std::size_t i = 0; i < psi.size(); ++i) direct[i] /= (2.0 * m);

    // Interior comparison (the composed stencil has radius 2).
    double worst = 0.0;
    std::vector<std::size_t> idx(1, 0);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi.unflatten(i, idx);
      if (!psi.interior(idx, 2)) continue;
      worst = std::max(worst, std::abs(expansion[i] - direct[i]));
    }
    return worst;
  };

  double coarse = run(1 << 9);
  double mid = run(1 << 12);
  double fine = run(1 << 16);
  CHECK(fine < 1e-8);
  double ratio = coarse / mid;  // second order over a factor-8 refinement: ~64
  CHECK(ratio > 40.0);
  CHECK(ratio < 90.0);
}

TEST_CASE("prequantum operators") {
  SUBCASE("vertical variant agrees with the pulled-back operator on "
          "momentum-independent sections") {
    // f = a(t,q) p_1 + b(t,q) over one spatial dimension
    Polynomial a = Polynomial::constant(2, 0.4) + Polynomial::variable(2, 0) * 0.3 +
                   Polynomial::variable(2, 1) * Polynomial::variable(2, 1) * 0.2;
    Polynomial b = Polynomial::variable(2, 0) * Polynomial::variable(2, 1) * 0.5;
    VerticalObservable f = VerticalObservable::affine(
        {ScalarField::polynomial(a)}, ScalarField::polynomial(b));

    std::vector<Axis> axes4 = {{"t", -1.0, 1.0, 8},
                               {"q1", -1.0, 1.0, 10},
                               {"p0", -1.0, 1.0, 6},
                               {"p1", -1.0, 1.0, 10}};
    std::vector<Axis> axes3 = {axes4[0], axes4[1], axes4[3]};

    auto section = [](std::span<const double> x) {
      return Complex(1.0 + 0.3 * x[0] - 0.2 * x[1], 0.1 * x[2]) +
             Complex(0.05, 0.0) * x[1] * x[2];
    };
    ComplexGrid big = make_grid(axes4, Boundary::DirichletZero,
                                [&](std::span<const double> x) {
                                  Vec slice = {x[0], x[1], x[3]};
                                  return section(slice);
                                });
    ComplexGrid small = make_grid(axes3, Boundary::DirichletZero, section);

    ComplexGrid big_out = prequantum_operator(pullback_to_homogeneous(f))(big);
    ComplexGrid small_out = prequantum_operator_vertical(f)(small);

    double worst = 0.0;
    std::vector<std::size_t> i4(4, 0);
    for (std::size_t flat = 0; flat < big.size(); ++flat) {
      big.unflatten(flat, i4);
      if (i4[2] == 0 || i4[2] + 1 == big.axis(2).n) continue;  // p0 edges
      std::vector<std::size_t> i3 = {i4[0], i4[1], i4[3]};
      worst = std::max(worst, std::abs(big_out[flat] - small_out[small.flatten(i3)]));
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("vertical momentum acts as -i d_q") {
    VerticalObservable pk = VerticalObservable::momentum(1, 0);
    std::vector<Axis> axes = {{"t", -1.0, 1.0, 8},
                              {"q1", -1.0, 1.0, 12},
                              {"p1", -1.0, 1.0, 12}};
    ComplexGrid s = make_grid(axes, Boundary::DirichletZero, [](std::span<const double> x) {
      return Complex(1.0 + 0.2 * x[0] + 0.3 * x[1] - 0.1 * x[2], 0.15 * x[1]);
    });
    ComplexGrid lhs = prequantum_operator_vertical(pk)(s);
    ComplexGrid d = central_difference(s, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      worst = std::max(worst, std::abs(lhs[i] + kI * d[i]));
    CHECK(worst < 1e-13);

    ComplexGrid one = prequantum_operator_vertical(VerticalObservable::constant(1, 1.0))(s);
    CHECK(max_diff(one, s) == 0.0);
  }

  SUBCASE("phase-section grids beyond two configuration dimensions are refused") {
    CHECK_THROWS_AS(prequantum_operator(Observable::momentum(3, 0)), DimensionMismatch);
  }

  SUBCASE("operators are linear") {
    std::vector<Axis> axes = {{"q0", -1.0, 1.0, 16}, {"p0", -1.0, 1.0, 16}};
    std::mt19937_64 eng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ComplexGrid r1 = make_grid(axes, Boundary::DirichletZero, [&](std::span<const double>) {
      return Complex(dist(eng), dist(eng));
    });
    ComplexGrid r2 = make_grid(axes, Boundary::DirichletZero, [&](std::span<const double>) {
      return Complex(dist(eng), dist(eng));
    });
    QuantumOperator op = prequantum_operator(Observable::coordinate(1, 0));
    Complex alpha(0.7, -0.2), beta(-0.3, 0.4);
    ComplexGrid combo = r1.like();
    for (std::size_t i = 0; i < combo.size(); ++i)
      combo[i] = alpha * r1[i] + beta * r2[i];
    ComplexGrid lhs = op(combo);
    ComplexGrid o1 = op(r1), o2 = op(r2);
    double worst = 0.0;
    for (std::size_t i = 0; i < combo.size(); ++i)
      worst = std::max(worst, std::abs(lhs[i] - alpha * o1[i] - beta * o2[i]));
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("inner product") {
  std::vector<Axis> axes = {{"x", -8.0, 8.0, 256}};
  const double sigma = 1.0;
  // |rho|^2 integrates to sigma sqrt(2 pi); the pairing carries 1/(2 pi).
  const double amp = std::pow(kTwoPi, 0.25) / std::sqrt(sigma);
  ComplexGrid rho =
      gaussian_packet(axes, Boundary::DirichletZero, {0.0}, {sigma}, {0.6}, amp);
  CHECK(std::abs(inner_product(rho, rho).real() - 1.0) < 1e-8);

  ComplexGrid other = gaussian_packet(axes, Boundary::DirichletZero, {0.5}, {0.8}, {0.2});
  auto ab = inner_product(rho, other);
  auto ba = inner_product(other, rho);
  CHECK(ab.real() == doctest::Approx(ba.real()));
  CHECK(ab.imag() == doctest::Approx(-ba.imag()));
  CHECK(inner_product(rho, rho).real() > 0.0);

  ComplexGrid zero = rho.like();
  CHECK(grid_norm(zero) == 0.0);
}

TEST_CASE("commutator residuals on the grid representation") {
  // For coordinate against momentum the defect is the central-difference
  // smoothing (rho_{i+1}+rho_{i-1})/2 - rho_i, which vanishes identically on
  // sections of degree <= 1 per coordinate.
  std::vector<Axis> axes = {{"x", -2.0, 2.0, 64}};
  std::vector<ComplexGrid> linear;
  linear.push_back(make_grid(axes, Boundary::DirichletZero, [](std::span<const double> x) {
    return Complex(1.0 + 0.4 * x[0], 0.2 - 0.1 * x[0]);
  }));
  Observable q = Observable::coordinate(1, 0);
  Observable p = Observable::momentum(1, 0);
  CHECK(commutator_residual(q, p, linear) < 1e-10);
  CHECK(commutator_residual(q, q, linear) == 0.0);

  // On generic smooth probes the same pair has a second-order defect.
  auto gauss_probe = [&](std::size_t n) {
    std::vector<ComplexGrid> probes;
    probes.push_back(gaussian_packet({{"x", -6.0, 6.0, n}}, Boundary::DirichletZero,
                                     {0.0}, {1.0}, {0.5}));
    return probes;
  };
  double r128 = commutator_residual(q, p, gauss_probe(128));
  double r256 = commutator_residual(q, p, gauss_probe(256));
  CHECK(r128 / r256 > 3.0);
  CHECK(r128 / r256 < 5.0);
}

TEST_CASE("half-density transform guards") {
  std::vector<Axis> axes = {{"x", -4.0, 4.0, 128}};
  ComplexGrid rho = gaussian_packet(axes, Boundary::DirichletZero, {0.5}, {0.6}, {0.0});

  Chart no_transition(1);
  CHECK_THROWS_AS(half_density_transform(rho, no_transition, axes), Error);

  // Non-invertible transition: the Jacobian vanishes inside the box.
  Chart folded = Chart(1).with_transition(
      [](std::span<const double> q) { return Vec{q[0] * q[0]}; },
      [](std::span<const double> q) {
        Mat j(1, 1);
        j(0, 0) = 2.0 * q[0];
        return j;
      });
  CHECK_THROWS_AS(half_density_transform(rho, folded, axes), Error);
}

TEST_CASE("grid serialization round trips") {
  std::mt19937_64 eng(37);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexGrid g = make_grid({{"x", -1.0, 2.0, 12}, {"y", 0.0, 1.0, 7}},
                            Boundary::Periodic, [&](std::span<const double>) {
                              return Complex(dist(eng), dist(eng));
                            });
  const std::string path = "test_grid_roundtrip.gqgrid";
  save_grid_binary(g, path);
  ComplexGrid back = load_grid_binary(path);
  REQUIRE(back.same_layout(g));
  CHECK(max_diff(back, g) == 0.0);
  CHECK(back.axis(0).label == "x");

  ComplexGrid jback = grid_from_json_string(grid_to_json_string(g));
  REQUIRE(jback.same_layout(g));
  CHECK(max_diff(jback, g) == 0.0);
  std::remove(path.c_str());
}
