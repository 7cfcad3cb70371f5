#include "gqmech/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "gqmech/errors.hpp"

namespace gqm {

namespace {

using Complex = ComplexGrid::Complex;
constexpr Complex kI(0.0, 1.0);
constexpr double kTwoPi = 6.28318530717958647692;

std::size_t spatial_axis_count(const ComplexGrid& g) {
  std::size_t m = 0;
  for (const Axis& a : g.axes())
    if (a.label != "t" && a.label != "q0") ++m;
  return m;
}

}  // namespace

QuantumOperator schrodinger_operator(const Observable& f, SchrodingerOptions opts) {
  const Observable::AffineForm* form = f.affine_form();
  if (!form)
    throw QuadraticRequired("schrodinger_operator: observable must be affine in momenta");
  const std::size_t n = f.dim_q();

  auto coeffs = std::make_shared<std::vector<ScalarField>>(form->a);
  auto b = std::make_shared<ScalarField>(form->b);
  auto divs = std::make_shared<std::vector<ScalarField>>();
  for (std::size_t u = 0; u < n; ++u) divs->push_back(form->a[u].partial(u));

  OperatorDescriptor desc;
  desc.kind = OperatorDescriptor::Kind::Affine;
  desc.label = "affine";
  desc.half_density_correction = opts.half_density_correction;
  const bool corr = opts.half_density_correction;

  return QuantumOperator(desc, [coeffs, divs, b, n, corr](const ComplexGrid& g) {
    if (g.dim() != n)
      throw DimensionMismatch("schrodinger_operator: grid/observable dimension");
    std::vector<ComplexGrid> deriv;
    deriv.reserve(n);
    for (std::size_t u = 0; u < n; ++u) deriv.push_back(central_difference(g, u));

    ComplexGrid out = g.like();
    std::vector<std::size_t> idx(n, 0);
    Vec x(n, 0.0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      g.unflatten(flat, idx);
      g.coords_of(idx, x);
      Complex acc = (*b)(x)*g[flat];
      for (std::size_t u = 0; u < n; ++u) {
        const double au = (*coeffs)[u](x);
        if (au != 0.0) acc -= kI * au * deriv[u][flat];
        if (corr) {
          const double dv = (*divs)[u](x);
          if (dv != 0.0) acc -= kI * 0.5 * dv * g[flat];
        }
      }
      out[flat] = acc;
    }
    return out;
  });
}

MatrixField MatrixField::constant(const Mat& m) {
  MatrixField f;
  const std::size_t n = m.rows();
  f.a.resize(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      f.a[u].push_back(ScalarField::constant(n, m(u, v)));
  return f;
}

MatrixField MatrixField::diagonal(std::vector<ScalarField> diag) {
  MatrixField f;
  const std::size_t n = diag.size();
  f.a.resize(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      f.a[u].push_back(u == v ? diag[u] : ScalarField::constant(diag[u].dim(), 0.0));
  return f;
}

void MatrixField::check_symmetric_at(std::span<const double> q) const {
  for (std::size_t u = 0; u < dim(); ++u)
    for (std::size_t v = u + 1; v < dim(); ++v) {
      double auv = a[u][v](q), avu = a[v][u](q);
      if (std::abs(auv - avu) > 1e-10 * std::max(1.0, std::abs(auv)))
        throw Error("quadratic_operator: coefficient matrix not symmetric");
    }
}

QuantumOperator quadratic_operator(const MatrixField& a, std::vector<ScalarField> bvec,
                                   ScalarField c) {
  const std::size_t n = a.dim();
  if (n == 0) throw DimensionMismatch("quadratic_operator: empty coefficient matrix");
  for (const auto& row : a.a)
    if (row.size() != n) throw DimensionMismatch("quadratic_operator: ragged matrix");
  if (bvec.size() != n) throw DimensionMismatch("quadratic_operator: b component count");

  auto amat = std::make_shared<MatrixField>(a);
  QuantumOperator affine_part =
      schrodinger_operator(Observable::affine(std::move(bvec), std::move(c)));

  OperatorDescriptor desc;
  desc.kind = OperatorDescriptor::Kind::Quadratic;
  desc.label = "quadratic";
  desc.chart_local = true;

  return QuantumOperator(desc, [amat, affine_part, n](const ComplexGrid& g) {
    if (g.dim() != n)
      throw DimensionMismatch("quadratic_operator: grid/coefficient dimension");
    ComplexGrid out = affine_part(g);

    std::vector<std::size_t> idx(n, 0);
    Vec x(n, 0.0);
    // Symmetry spot check at the box center.
    {
      Vec mid(n, 0.0);
      for (std::size_t u = 0; u < n; ++u) mid[u] = 0.5 * (g.axis(u).lo + g.axis(u).hi);
      amat->check_symmetric_at(mid);
    }

    // Diagonal terms in flux form: -(F_{i+1/2} - F_{i-1/2}) / h with
    // F_{i+1/2} = a(x_{i+1/2}) (rho_{i+1} - rho_i) / h.
    for (std::size_t u = 0; u < n; ++u) {
      const ScalarField& auu = amat->a[u][u];
      const double h = g.spacing(u);
      for (std::size_t flat = 0; flat < g.size(); ++flat) {
        g.unflatten(flat, idx);
        g.coords_of(idx, x);
        const double xu = x[u];
        Complex up = g.shifted(idx, flat, u, +1);
        Complex dn = g.shifted(idx, flat, u, -1);
        x[u] = xu + 0.5 * h;
        const double ap = auu(x);
        x[u] = xu - 0.5 * h;
        const double am = auu(x);
        x[u] = xu;
        out[flat] -= (ap * (up - g[flat]) - am * (g[flat] - dn)) / (h * h);
      }
    }

    // Cross terms via composed central differences; the (u,v)+(v,u) pair of
    // a symmetric matrix keeps the discrete operator symmetric.
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u == v) continue;
        const ScalarField& auv = amat->a[u][v];
        ComplexGrid w = central_difference(g, v);
        for (std::size_t flat = 0; flat < g.size(); ++flat) {
          g.unflatten(flat, idx);
          g.coords_of(idx, x);
          w[flat] *= auv(x);
        }
        ComplexGrid dw = central_difference(w, u);
        for (std::size_t flat = 0; flat < g.size(); ++flat) out[flat] -= dw[flat];
      }
    }
    return out;
  });
}

QuantumOperator prequantum_operator(const Observable& f) {
  const std::size_t n = f.dim_q();
  if (n > 2)
    throw DimensionMismatch(
        "prequantum_operator: phase-section grids support dim_q <= 2");
  Observable fc = f;

  OperatorDescriptor desc;
  desc.kind = OperatorDescriptor::Kind::Prequantum;
  desc.label = "prequantum";

  return QuantumOperator(desc, [fc, n](const ComplexGrid& g) {
    if (g.dim() != 2 * n)
      throw DimensionMismatch("prequantum_operator: grid must span (q, p)");
    std::vector<ComplexGrid> dq, dp;
    dq.reserve(n);
    dp.reserve(n);
    for (std::size_t lam = 0; lam < n; ++lam) {
      dq.push_back(central_difference(g, lam));
      dp.push_back(central_difference(g, n + lam));
    }
    ComplexGrid out = g.like();
    std::vector<std::size_t> idx(2 * n, 0);
    Vec x(2 * n, 0.0);
    PhasePoint z;
    z.q.resize(n);
    z.p.resize(n);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      g.unflatten(flat, idx);
      g.coords_of(idx, x);
      for (std::size_t lam = 0; lam < n; ++lam) {
        z.q[lam] = x[lam];
        z.p[lam] = x[n + lam];
      }
      Vec gq = fc.grad_q(z);
      Vec gp = fc.grad_p(z);
      double val = fc.value(z);
      Complex transport(0.0, 0.0);
      double scalar = val;
      for (std::size_t lam = 0; lam < n; ++lam) {
        transport += gp[lam] * dq[lam][flat] - gq[lam] * dp[lam][flat];
        scalar -= z.p[lam] * gp[lam];
      }
      out[flat] = -kI * transport + scalar * g[flat];
    }
    return out;
  });
}

QuantumOperator prequantum_operator_vertical(const VerticalObservable& f) {
  const std::size_t m = f.dim_m();
  if (m > 1)
    throw DimensionMismatch(
        "prequantum_operator_vertical: section grids support one spatial dim");
  VerticalObservable fc = f;

  OperatorDescriptor desc;
  desc.kind = OperatorDescriptor::Kind::PrequantumVertical;
  desc.label = "prequantum-vertical";

  return QuantumOperator(desc, [fc, m](const ComplexGrid& g) {
    if (g.dim() != 1 + 2 * m)
      throw DimensionMismatch("prequantum_operator_vertical: grid must span (t, q, p)");
    std::vector<ComplexGrid> dq, dp;
    for (std::size_t k = 0; k < m; ++k) {
      dq.push_back(central_difference(g, 1 + k));
      dp.push_back(central_difference(g, 1 + m + k));
    }
    ComplexGrid out = g.like();
    std::vector<std::size_t> idx(1 + 2 * m, 0);
    Vec x(1 + 2 * m, 0.0);
    VerticalPhasePoint s;
    s.q.resize(m);
    s.p.resize(m);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      g.unflatten(flat, idx);
      g.coords_of(idx, x);
      s.t = x[0];
      for (std::size_t k = 0; k < m; ++k) {
        s.q[k] = x[1 + k];
        s.p[k] = x[1 + m + k];
      }
      Vec gq = fc.grad_q(s);
      Vec gp = fc.grad_p(s);
      double val = fc.value(s);
      Complex transport(0.0, 0.0);
      double scalar = val;
      for (std::size_t k = 0; k < m; ++k) {
        transport += gp[k] * dq[k][flat] - gq[k] * dp[k][flat];
        scalar -= s.p[k] * gp[k];
      }
      out[flat] = -kI * transport + scalar * g[flat];
    }
    return out;
  });
}

std::complex<double> inner_product(const ComplexGrid& r1, const ComplexGrid& r2) {
  if (!r1.same_layout(r2)) throw DimensionMismatch("inner_product: grid layouts differ");
  Complex s(0.0, 0.0);
  for (std::size_t i = 0; i < r1.size(); ++i) s += r1[i] * std::conj(r2[i]);
  double factor = r1.cell_volume();
  const std::size_t m = spatial_axis_count(r1);
  for (std::size_t k = 0; k < m; ++k) factor /= kTwoPi;
  return s * factor;
}

double grid_norm(const ComplexGrid& g) {
  return std::sqrt(std::abs(inner_product(g, g)));
}

void normalize(ComplexGrid& g) {
  double nrm = grid_norm(g);
  if (nrm == 0.0) throw Error("normalize: zero grid");
  for (auto& v : g.values()) v /= nrm;
}

double interior_norm(const ComplexGrid& g, std::size_t margin) {
  double s = 0.0;
  std::vector<std::size_t> idx(g.dim(), 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    if (g.interior(idx, margin)) s += std::norm(g[flat]);
  }
  return std::sqrt(s * g.cell_volume());
}

namespace {

double dirac_defect(const QuantumOperator& fhat, const QuantumOperator& ghat,
                    const QuantumOperator& bracket_hat,
                    std::span<const ComplexGrid> probes, std::size_t margin) {
  double worst = 0.0;
  for (const ComplexGrid& rho : probes) {
    ComplexGrid fg = fhat(ghat(rho));
    ComplexGrid gf = ghat(fhat(rho));
    ComplexGrid br = bracket_hat(rho);
    ComplexGrid r = rho.like();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = fg[i] - gf[i] + kI * br[i];
    double denom = interior_norm(rho, margin);
    if (denom == 0.0) throw Error("commutator_residual: probe vanishes on interior");
    worst = std::max(worst, interior_norm(r, margin) / denom);
  }
  return worst;
}

}  // namespace

double commutator_residual(const Observable& f, const Observable& g,
                           std::span<const ComplexGrid> probes, std::size_t margin) {
  QuantumOperator fhat = schrodinger_operator(f);
  QuantumOperator ghat = schrodinger_operator(g);
  QuantumOperator bhat = schrodinger_operator(affine_bracket(f, g));
  return dirac_defect(fhat, ghat, bhat, probes, margin);
}

double prequantum_commutator_residual(const Observable& f, const Observable& g,
                                      std::span<const ComplexGrid> probes,
                                      std::size_t margin) {
  QuantumOperator fhat = prequantum_operator(f);
  QuantumOperator ghat = prequantum_operator(g);
  Observable bracket;
  if (f.affine_form() && g.affine_form() && f.analytic() && g.analytic())
    bracket = affine_bracket(f, g);
  else
    bracket = poisson_bracket_poly(f, g);
  QuantumOperator bhat = prequantum_operator(bracket);
  return dirac_defect(fhat, ghat, bhat, probes, margin);
}

double hermiticity_residual(const QuantumOperator& op,
                            std::span<const ComplexGrid> probes) {
  std::vector<ComplexGrid> applied;
  applied.reserve(probes.size());
  for (const ComplexGrid& r : probes) applied.push_back(op(r));
  double worst = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i; j < probes.size(); ++j) {
      auto lhs = inner_product(applied[i], probes[j]);
      auto rhs = inner_product(probes[i], applied[j]);
      double denom = grid_norm(probes[i]) * grid_norm(probes[j]);
      if (denom == 0.0) continue;
      worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
  }
  return worst;
}

namespace {

Complex sample_by_index(const ComplexGrid& g, std::span<const std::ptrdiff_t> idx) {
  std::size_t flat = 0;
  for (std::size_t ax = 0; ax < g.dim(); ++ax) {
    std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.axis(ax).n);
    std::ptrdiff_t j = idx[ax];
    if (j < 0 || j >= n) {
      if (g.boundary() == Boundary::DirichletZero) return Complex(0.0, 0.0);
      j = ((j % n) + n) % n;
    }
    flat += static_cast<std::size_t>(j) * g.stride(ax);
  }
  return g[flat];
}

// 4-point Lagrange weights for a fractional offset xi in [0, 1] relative to
// nodes at -1, 0, 1, 2.
void cubic_weights(double xi, double w[4]) {
  w[0] = -xi * (xi - 1.0) * (xi - 2.0) / 6.0;
  w[1] = (xi + 1.0) * (xi - 1.0) * (xi - 2.0) / 2.0;
  w[2] = -(xi + 1.0) * xi * (xi - 2.0) / 2.0;
  w[3] = (xi + 1.0) * xi * (xi - 1.0) / 6.0;
}

Complex cubic_interpolate(const ComplexGrid& g, std::span<const double> x) {
  const std::size_t d = g.dim();
  std::vector<std::ptrdiff_t> base(d);
  std::vector<std::array<double, 4>> w(d);
  for (std::size_t ax = 0; ax < d; ++ax) {
    const double h = g.spacing(ax);
    const double u = (x[ax] - g.coord(ax, 0)) / h;
    double fl = std::floor(u);
    base[ax] = static_cast<std::ptrdiff_t>(fl);
    cubic_weights(u - fl, w[ax].data());
  }
  // Tensor-product gather over 4^d points.
  std::size_t combos = 1;
  for (std::size_t ax = 0; ax < d; ++ax) combos *= 4;
  Complex acc(0.0, 0.0);
  std::vector<std::ptrdiff_t> idx(d);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rem = c;
    double weight = 1.0;
    for (std::size_t ax = 0; ax < d; ++ax) {
      const std::size_t pick = rem % 4;
      rem /= 4;
      idx[ax] = base[ax] + static_cast<std::ptrdiff_t>(pick) - 1;
      weight *= w[ax][pick];
    }
    if (weight != 0.0) acc += weight * sample_by_index(g, idx);
  }
  return acc;
}

}  // namespace

ComplexGrid half_density_transform(const ComplexGrid& rho, const Chart& chart,
                                   std::vector<Axis> target_axes) {
  if (chart.dim_q() != rho.dim())
    throw DimensionMismatch("half_density_transform: chart/grid dimension");
  if (target_axes.size() != rho.dim())
    throw DimensionMismatch("half_density_transform: target axis count");
  if (!chart.has_transition())
    throw Error("half_density_transform: chart has no transition");

  ComplexGrid out(std::move(target_axes), rho.boundary());
  const std::size_t d = out.dim();
  std::vector<std::size_t> idx(d, 0);
  Vec target(d, 0.0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out.unflatten(flat, idx);
    out.coords_of(idx, target);

    // Newton inversion of the forward map.
    Vec q = target;
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      Vec r = chart.forward(q);
      double err = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        r[i] -= target[i];
        err = std::max(err, std::abs(r[i]));
      }
      if (err <= 1e-13 * std::max(1.0, norm_inf(target))) {
        converged = true;
        break;
      }
      Mat jac = chart.jacobian(q);
      Vec delta = solve_dense(jac, r);
      for (std::size_t i = 0; i < d; ++i) q[i] -= delta[i];
    }
    if (!converged)
      throw Error("half_density_transform: transition inversion did not converge");

    const double jdet = std::abs(determinant(chart.jacobian(q)));
    out[flat] = cubic_interpolate(rho, q) / std::sqrt(jdet);
  }
  return out;
}

ComplexGrid gaussian_packet(std::vector<Axis> axes, Boundary boundary, const Vec& center,
                            const Vec& sigma, const Vec& wavevec, double amplitude) {
  const std::size_t d = axes.size();
  if (center.size() != d || sigma.size() != d || wavevec.size() != d)
    throw DimensionMismatch("gaussian_packet: parameter sizes");
  return make_grid(std::move(axes), boundary, [&, d](std::span<const double> x) {
    double arg = 0.0, phase = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double dx = x[i] - center[i];
      arg += dx * dx / (4.0 * sigma[i] * sigma[i]);
      phase += wavevec[i] * x[i];
    }
    return amplitude * std::exp(Complex(-arg, phase));
  });
}

}  // namespace gqm
