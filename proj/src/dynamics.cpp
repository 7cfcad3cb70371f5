#include "gqmech/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "gqmech/errors.hpp"

namespace gqm {

namespace {

using ordered_json = nlohmann::ordered_json;

Polynomial momentum_poly(std::size_t n, std::size_t mu) {
  return Polynomial::variable(2 * n, n + mu);
}

std::vector<std::size_t> q_to_phase_map(std::size_t n) {
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = i;
  return map;
}

}  // namespace

HamiltonianSystem free_special(double mass, std::size_t dim_q) {
  if (mass <= 0.0) throw Error("free_special: mass must be positive");
  HamiltonianSystem sys;
  sys.kind = SystemKind::Relativistic;
  sys.name = "free-special";
  sys.dim_q = dim_q;
  sys.mass = mass;
  sys.metric = MetricField::minkowski(dim_q);

  Polynomial h(2 * dim_q);
  h += momentum_poly(dim_q, 0) * momentum_poly(dim_q, 0) * (-0.5 / mass);
  for (std::size_t i = 1; i < dim_q; ++i)
    h += momentum_poly(dim_q, i) * momentum_poly(dim_q, i) * (0.5 / mass);
  sys.generator = Observable::from_poly(dim_q, std::move(h));
  return sys;
}

HamiltonianSystem charged_em(double mass, double charge,
                             std::vector<ScalarField> potential) {
  if (mass <= 0.0) throw Error("charged_em: mass must be positive");
  const std::size_t n = potential.size();
  if (n < 2) throw DimensionMismatch("charged_em: potential needs >= 2 components");
  for (const ScalarField& a : potential)
    if (a.dim() != n) throw DimensionMismatch("charged_em: potential component dim");

  HamiltonianSystem sys;
  sys.kind = SystemKind::Relativistic;
  sys.name = "charged-em";
  sys.dim_q = n;
  sys.mass = mass;
  sys.charge = charge;
  sys.metric = MetricField::minkowski(n);
  sys.potential = potential;

  bool all_poly = true;
  for (const ScalarField& a : potential) all_poly = all_poly && a.poly() != nullptr;

  if (all_poly) {
    auto map = q_to_phase_map(n);
    Polynomial h(2 * n);
    for (std::size_t mu = 0; mu < n; ++mu) {
      Polynomial pi = momentum_poly(n, mu);
      pi -= potential[mu].poly()->remap(2 * n, map) * charge;
      const double eta = (mu == 0) ? 1.0 : -1.0;
      h += pi * pi * (-0.5 * eta / mass);
    }
    sys.generator = Observable::from_poly(n, std::move(h));
  } else {
    auto pot = std::make_shared<std::vector<ScalarField>>(std::move(potential));
    const double m = mass, e = charge;
    auto kinetic = [pot, e, n](const PhasePoint& z) {
      Vec pi(n);
      for (std::size_t mu = 0; mu < n; ++mu) pi[mu] = z.p[mu] - e * (*(pot))[mu](z.q);
      return pi;
    };
    auto value = [kinetic, m, n](const PhasePoint& z) {
      Vec pi = kinetic(z);
      double s = pi[0] * pi[0];
      for (std::size_t i = 1; i < n; ++i) s -= pi[i] * pi[i];
      return -0.5 * s / m;
    };
    auto grad_p = [kinetic, m, n](const PhasePoint& z) {
      Vec pi = kinetic(z);
      Vec g(n);
      g[0] = -pi[0] / m;
      for (std::size_t i = 1; i < n; ++i) g[i] = pi[i] / m;
      return g;
    };
    auto grad_q = [pot, kinetic, m, e, n](const PhasePoint& z) {
      Vec pi = kinetic(z);
      Vec g(n, 0.0);
      for (std::size_t mu = 0; mu < n; ++mu) {
        const double eta = (mu == 0) ? 1.0 : -1.0;
        Vec da = (*pot)[mu].gradient(z.q);
        for (std::size_t lam = 0; lam < n; ++lam)
          g[lam] += (e / m) * eta * pi[mu] * da[lam];
      }
      return g;
    };
    sys.generator = Observable::general(n, value, grad_q, grad_p);
  }
  return sys;
}

HamiltonianSystem curved_metric(double mass, MetricField metric) {
  if (mass <= 0.0) throw Error("curved_metric: mass must be positive");
  const std::size_t n = metric.dim();
  HamiltonianSystem sys;
  sys.kind = SystemKind::Relativistic;
  sys.name = "curved-metric";
  sys.dim_q = n;
  sys.mass = mass;
  sys.metric = metric;

  const double m = mass;
  auto value = [metric, m, n](const PhasePoint& z) {
    Mat gi = metric.inverse_at(z.q);
    double s = 0.0;
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu) s += gi(mu, nu) * z.p[mu] * z.p[nu];
    return -0.5 * s / m;
  };
  auto grad_p = [metric, m, n](const PhasePoint& z) {
    Mat gi = metric.inverse_at(z.q);
    Vec g(n, 0.0);
    for (std::size_t mu = 0; mu < n; ++mu)
      for (std::size_t nu = 0; nu < n; ++nu) g[mu] -= gi(mu, nu) * z.p[nu] / m;
    return g;
  };
  Observable::GradFn grad_q = [metric, m, n](const PhasePoint& z) {
    Vec g(n, 0.0);
    for (std::size_t lam = 0; lam < n; ++lam) {
      Mat dgi = metric.inverse_partial_at(z.q, lam);
      double s = 0.0;
      for (std::size_t mu = 0; mu < n; ++mu)
        for (std::size_t nu = 0; nu < n; ++nu) s += dgi(mu, nu) * z.p[mu] * z.p[nu];
      g[lam] = -0.5 * s / m;
    }
    return g;
  };
  sys.generator = Observable::general(n, value, grad_q, grad_p);
  return sys;
}

HamiltonianSystem nonrel_oscillator(double omega, std::size_t spatial_dim) {
  HamiltonianSystem sys;
  sys.kind = SystemKind::NonRelativistic;
  sys.name = "nonrel-oscillator";
  sys.dim_q = spatial_dim + 1;

  const std::size_t m = spatial_dim;
  Polynomial h(1 + 2 * m);
  for (std::size_t k = 0; k < m; ++k) {
    Polynomial pk = Polynomial::variable(1 + 2 * m, 1 + m + k);
    Polynomial qk = Polynomial::variable(1 + 2 * m, 1 + k);
    h += pk * pk * 0.5;
    h += qk * qk * (
        0.5 * omega * omega);
  }
  sys.h_vertical = VerticalObservable::from_poly(m, std::move(h));
  sys.generator = pullback_to_homogeneous(sys.h_vertical);
  // p_0 + H as the homogeneous generator
  {
    Polynomial gen = *sys.generator.poly();
    gen += Polynomial::variable(2 * (m + 1), m + 1);
    sys.generator = Observable::from_poly(m + 1, std::move(gen));
  }
  return sys;
}

HamiltonianSystem nonrel_free(std::size_t spatial_dim) {
  HamiltonianSystem sys = nonrel_oscillator(0.0, spatial_dim);
  sys.name = "nonrel-free";
  return sys;
}

std::vector<ScalarField> constant_magnetic_potential(double b_field, std::size_t dim_q) {
  if (dim_q < 3) throw DimensionMismatch("constant_magnetic_potential: need dim_q >= 3");
  // A_1 = -B q^2 / 2, A_2 = +B q^1 / 2 (symmetric gauge, field along axis 3).
  std::vector<ScalarField> a;
  a.push_back(ScalarField::constant(dim_q, 0.0));
  a.push_back(ScalarField::polynomial(Polynomial::variable(dim_q, 2) * (-0.5 * b_field)));
  a.push_back(ScalarField::polynomial(Polynomial::variable(dim_q, 1) * (0.5 * b_field)));
  for (std::size_t i = 3; i < dim_q; ++i) a.push_back(ScalarField::constant(dim_q, 0.0));
  return a;
}

std::vector<std::vector<std::string>> example_curved_metric_expressions(double epsilon) {
  char buf[96];
  auto fill = [&](const char* pattern) {
    std::snprintf(buf, sizeof(buf), pattern, epsilon);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> comps(4, std::vector<std::string>(4, "0"));
  comps[0][0] = fill("1 + %.17g*cos(q1)");
  comps[1][1] = fill("-1 - %.17g*sin(q2)");
  comps[2][2] = fill("-1 - %.17g*cos(q3)");
  comps[3][3] = fill("-1 - %.17g*sin(q1 + q2)");
  return comps;
}

MetricField example_curved_metric(double epsilon) {
  auto comps = example_curved_metric_expressions(epsilon);
  std::vector<std::string> names = {"q0", "q1", "q2", "q3"};
  std::vector<std::vector<Expression>> exprs(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      exprs[i].push_back(Expression::parse(comps[i][j], names));
  return MetricField::from_expressions(std::move(exprs));
}

VerticalTangent nonrel_vector_field(const HamiltonianSystem& sys,
                                    const VerticalPhasePoint& s) {
  if (sys.kind != SystemKind::NonRelativistic)
    throw Error("nonrel_vector_field: system is not non-relativistic");
  VerticalTangent out;
  out.dt = 1.0;
  out.dq = sys.h_vertical.grad_p(s);
  out.dp = sys.h_vertical.grad_q(s);
  for (double& v : out.dp) v = -v;
  if (!all_finite(out.dq) || !all_finite(out.dp))
    throw NonFiniteValue("nonrel_vector_field: non-finite gradient");
  return out;
}

PhaseTangent flow_vector_field(const HamiltonianSystem& sys, const PhasePoint& z) {
  return hamiltonian_vector_field(sys.generator, z);
}

double constraint_residual(const HamiltonianSystem& sys, const PhasePoint& z) {
  if (z.q.size() != sys.dim_q)
    throw DimensionMismatch("constraint_residual: point dimension");
  if (sys.kind == SystemKind::NonRelativistic) return sys.generator.value(z);
  Vec gp = sys.generator.grad_p(z);
  Mat gmat = sys.metric.metric_at(z.q);
  double s = 0.0;
  for (std::size_t mu = 0; mu < sys.dim_q; ++mu)
    for (std::size_t nu = 0; nu < sys.dim_q; ++nu) s += gmat(mu, nu) * gp[mu] * gp[nu];
  return s - 1.0;
}

double constraint_invariance_residual(const HamiltonianSystem& sys, const PhasePoint& z,
                                      double fd_step) {
  if (sys.kind != SystemKind::Relativistic)
    throw Error("constraint_invariance_residual: relativistic systems only");
  HamiltonianSystem sys_copy = sys;
  Observable constraint = Observable::general(
      sys.dim_q,
      [sys_copy](const PhasePoint& w) { return constraint_residual(sys_copy, w); },
      nullptr, nullptr, fd_step);
  return poisson_bracket(sys.generator, constraint, z);
}

Vec contraction_residual_nonrel(const HamiltonianSystem& sys, const VerticalPhasePoint& s,
                                const VerticalTangent* gamma) {
  if (sys.kind != SystemKind::NonRelativistic)
    throw Error("contraction_residual_nonrel: non-relativistic systems only");
  const std::size_t m = s.dim_m();
  const std::size_t dim = 1 + 2 * m;  // coordinates (t, q^k, p_k)

  Vec hq = sys.h_vertical.grad_q(s);
  Vec hp = sys.h_vertical.grad_p(s);

  // dH = dp_k ^ dq^k - dH ^ dt as an antisymmetric matrix C.
  Mat c(dim, dim);
  for (std::size_t k = 0; k < m; ++k) {
    c(1 + k, 1 + m + k) = -1.0;  // dq^k ^ dp_k coefficient of dp_k ^ dq^k
    c(1 + m + k, 1 + k) = 1.0;
    c(0, 1 + k) = hq[k];  // -dH ^ dt = + dt ^ (dH spatial part)
    c(1 + k, 0) = -hq[k];
    c(0, 1 + m + k) = hp[k];
    c(1 + m + k, 0) = -hp[k];
  }

  Vec g(dim, 0.0);
  if (gamma) {
    g[0] = gamma->dt;
    for (std::size_t k = 0; k < m; ++k) {
      g[1 + k] = gamma->dq[k];
      g[1 + m + k] = gamma->dp[k];
    }
  } else {
    g[0] = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      g[1 + k] = hp[k];
      g[1 + m + k] = -hq[k];
    }
  }

  Vec out(dim, 0.0);
  for (std::size_t b = 0; b < dim; ++b) {
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) acc += g[a] * c(a, b);
    out[b] = acc;
  }
  return out;
}

double on_shell_p0(const HamiltonianSystem& sys, const Vec& q, const Vec& p_spatial) {
  const std::size_t n = sys.dim_q;
  if (q.size() != n || p_spatial.size() != n - 1)
    throw DimensionMismatch("on_shell_p0: component sizes");

  if (sys.kind == SystemKind::NonRelativistic) {
    VerticalPhasePoint s(q[0], Vec(q.begin() + 1, q.end()), p_spatial);
    return -sys.h_vertical.value(s);
  }

  if (!sys.potential.empty()) {
    // Minkowski with a covector potential: kinetic momenta on the shell.
    Vec a(n, 0.0);
    for (std::size_t mu = 0; mu < n; ++mu) a[mu] = sys.charge * sys.potential[mu](q);
    double s = sys.mass * sys.mass;
    for (std::size_t i = 1; i < n; ++i) {
      double pi = p_spatial[i - 1] - a[i];
      s += pi * pi;
    }
    return a[0] - std::sqrt(s);
  }

  Mat gi = sys.metric.inverse_at(q);
  double aa = gi(0, 0);
  double bb = 0.0, cc = -sys.mass * sys.mass;
  for (std::size_t k = 1; k < n; ++k) bb += 2.0 * gi(0, k) * p_spatial[k - 1];
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t k = 1; k < n; ++k) cc += gi(j, k) * p_spatial[j - 1] * p_spatial[k - 1];
  const double disc = bb * bb - 4.0 * aa * cc;
  if (disc < 0.0 || aa <= 0.0)
    throw Error("on_shell_p0: no real on-shell momentum at this point");
  // Root with g^{0 nu} p_nu < 0, i.e. future-pointing flow velocity.
  return (-bb - std::sqrt(disc)) / (2.0 * aa);
}

PhasePoint lift_on_section(const HamiltonianSystem& sys, const VerticalPhasePoint& s) {
  Vec q;
  q.reserve(s.q.size() + 1);
  q.push_back(s.t);
  q.insert(q.end(), s.q.begin(), s.q.end());
  return lift_homogeneous(s, on_shell_p0(sys, q, s.p));
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0)) throw Error("IntegratorConfig: step must be positive");
  if (!(implicit_tol > 0.0)) throw Error("IntegratorConfig: implicit_tol must be positive");
  if (implicit_max_iter < 1) throw Error("IntegratorConfig: implicit_max_iter >= 1");
  if (record_every < 1) throw Error("IntegratorConfig: record_every >= 1");
}

namespace {

Vec flatten(const PhasePoint& z) {
  Vec y;
  y.reserve(2 * z.q.size());
  y.insert(y.end(), z.q.begin(), z.q.end());
  y.insert(y.end(), z.p.begin(), z.p.end());
  return y;
}

PhasePoint unflatten(const Vec& y, std::size_t n) {
  PhasePoint z;
  z.q.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  z.p.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
  return z;
}

Vec eval_field(const HamiltonianSystem& sys, const Vec& y, std::size_t n) {
  PhaseTangent u = flow_vector_field(sys, unflatten(y, n));
  Vec f;
  f.reserve(2 * n);
  f.insert(f.end(), u.dq.begin(), u.dq.end());
  f.insert(f.end(), u.dp.begin(), u.dp.end());
  return f;
}

Vec rk4_step(const HamiltonianSystem& sys, const Vec& y, double h, std::size_t n) {
  Vec k1 = eval_field(sys, y, n);
  Vec tmp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  Vec k2 = eval_field(sys, tmp, n);
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  Vec k3 = eval_field(sys, tmp, n);
  for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
  Vec k4 = eval_field(sys, tmp, n);
  Vec out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

Vec midpoint_step(const HamiltonianSystem& sys, const Vec& y, double h, std::size_t n,
                  double tol, int max_iter) {
  // Fixed-point iteration on y' = y + h f((y + y')/2).
  Vec f0 = eval_field(sys, y, n);
  Vec w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] + h * f0[i];
  Vec mid(y.size());
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < y.size(); ++i) mid[i] = 0.5 * (y[i] + w[i]);
    Vec f = eval_field(sys, mid, n);
    double delta = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double next = y[i] + h * f[i];
      delta = std::max(delta, std::abs(next - w[i]));
      scale = std::max(scale, std::abs(next));
      w[i] = next;
    }
    if (delta <= tol * scale) return w;
  }
  throw ImplicitSolveDiverged("implicit midpoint: fixed point did not converge");
}

void project_to_shell(const HamiltonianSystem& sys, PhasePoint& z) {
  // Newton on the momentum scale alpha with residual(q, alpha p) = 0.
  double alpha = 1.0;
  for (int it = 0; it < 4; ++it) {
    PhasePoint w = z;
    for (std::size_t i = 0; i < w.p.size(); ++i) w.p[i] = alpha * z.p[i];
    double r = constraint_residual(sys, w);
    const double da = 1e-7;
    PhasePoint w2 = z;
    for (std::size_t i = 0; i < w2.p.size(); ++i) w2.p[i] = (alpha + da) * z.p[i];
    double r2 = constraint_residual(sys, w2);
    double deriv = (r2 - r) / da;
    if (deriv == 0.0) break;
    alpha -= r / deriv;
  }
  for (double& pi : z.p) pi *= alpha;
}

}  // namespace

TrajectoryRecord integrate(const HamiltonianSystem& sys, const PhasePoint& z0,
                           const IntegratorConfig& cfg, double duration) {
  cfg.validate();
  z0.check_finite();
  if (z0.q.size() != sys.dim_q) throw DimensionMismatch("integrate: initial point dim");
  if (duration < 0.0) throw Error("integrate: duration must be >= 0");

  TrajectoryRecord rec;
  const std::size_t n = sys.dim_q;

  double r0 = constraint_residual(sys, z0);
  if (sys.kind == SystemKind::Relativistic && std::abs(r0) > cfg.admission_tol)
    throw Error("integrate: initial state violates the constraint beyond admission_tol");
  if (sys.kind == SystemKind::Relativistic) {
    double inv = constraint_invariance_residual(sys, z0);
    if (std::abs(inv) > 1e-5)
      rec.warnings.push_back("constraint-invariance residual at start: " +
                             std::to_string(inv));
  }

  const char* conserved_name =
      sys.kind == SystemKind::Relativistic ? "hamiltonian" : "energy";
  rec.conserved.emplace_back(conserved_name, Vec{});

  auto record_state = [&](double s, const PhasePoint& z) {
    rec.parameter.push_back(s);
    rec.states.push_back(z);
    rec.residuals.push_back(constraint_residual(sys, z));
    double cval = sys.kind == SystemKind::Relativistic
                      ? sys.generator.value(z)
                      : sys.h_vertical.value(project_vertical(z));
    rec.conserved[0].second.push_back(cval);
  };

  Vec y = flatten(z0);
  double s = 0.0;
  record_state(0.0, z0);
  if (duration == 0.0) return rec;

  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(duration / cfg.step - 1e-12));
  for (std::size_t k = 0; k < steps; ++k) {
    double h = cfg.step;
    if (k + 1 == steps) h = duration - static_cast<double>(steps - 1) * cfg.step;
    if (cfg.method == IntegratorMethod::ExplicitRK4)
      y = rk4_step(sys, y, h, n);
    else
      y = midpoint_step(sys, y, h, n, cfg.implicit_tol, cfg.implicit_max_iter);
    if (!all_finite(y)) throw NonFiniteState("integrate: state became non-finite");
    s += h;
    PhasePoint z = unflatten(y, n);
    if (cfg.project_each_step && sys.kind == SystemKind::Relativistic) {
      project_to_shell(sys, z);
      y = flatten(z);
    }
    if ((k + 1) % static_cast<std::size_t>(cfg.record_every) == 0 || k + 1 == steps)
      record_state(s, z);
  }
  return rec;
}

void TrajectoryRecord::write_csv(std::ostream& os) const {
  const std::size_t n = states.empty() ? 0 : states[0].dim_q();
  os << "s";
  for (std::size_t i = 0; i < n; ++i) os << ",q" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",p" << i;
  os << ",residual";
  for (const auto& [name, series] : conserved) os << "," << name;
  os << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t r = 0; r < parameter.size(); ++r) {
    put(parameter[r]);
    for (std::size_t i = 0; i < n; ++i) {
      os << ",";
      put(states[r].q[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      os << ",";
      put(states[r].p[i]);
    }
    os << ",";
    put(residuals[r]);
    for (const auto& [name, series] : conserved) {
      os << ",";
      put(series[r]);
    }
    os << "\n";
  }
}

std::string TrajectoryRecord::to_json_string(int indent) const {
  ordered_json j;
  j["parameter"] = parameter;
  j["residuals"] = residuals;
  ordered_json states_j = ordered_json::array();
  for (const PhasePoint& z : states) {
    ordered_json zj;
    zj["q"] = z.q;
    zj["p"] = z.p;
    states_j.push_back(std::move(zj));
  }
  j["states"] = std::move(states_j);
  ordered_json cj;
  for (const auto& [name, series] : conserved) cj[name] = series;
  j["conserved"] = std::move(cj);
  j["warnings"] = warnings;
  return indent >= 0 ? j.dump(indent) : j.dump();
}

}  // namespace gqm
