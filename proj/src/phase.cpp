#include "gqmech/phase.hpp"

#include <algorithm>
#include <cmath>

#include "gqmech/errors.hpp"

namespace gqm {

Vec fd_gradient(const std::function<double(std::span<const double>)>& f,
                std::span<const double> x, double step) {
  Vec xp(x.begin(), x.end());
  Vec g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    const double x0 = xp[i];
    xp[i] = x0 + h;
    const double fp = f(xp);
    xp[i] = x0 - h;
    const double fm = f(xp);
    xp[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

PhasePoint::PhasePoint(Vec q_in, Vec p_in) : q(std::move(q_in)), p(std::move(p_in)) {
  if (q.size() != p.size())
    throw DimensionMismatch("PhasePoint: q and p must have equal length");
}

void PhasePoint::check_finite() const {
  if (!all_finite(q) || !all_finite(p))
    throw NonFiniteState("PhasePoint: non-finite component");
}

VerticalPhasePoint::VerticalPhasePoint(double t_in, Vec q_in, Vec p_in)
    : t(t_in), q(std::move(q_in)), p(std::move(p_in)) {
  if (q.size() != p.size())
    throw DimensionMismatch("VerticalPhasePoint: q and p must have equal length");
}

VerticalPhasePoint project_vertical(const PhasePoint& z) {
  if (z.q.empty()) throw DimensionMismatch("project_vertical: empty point");
  VerticalPhasePoint s;
  s.t = z.q[0];
  s.q.assign(z.q.begin() + 1, z.q.end());
  s.p.assign(z.p.begin() + 1, z.p.end());
  return s;
}

PhasePoint lift_homogeneous(const VerticalPhasePoint& s, double p0) {
  PhasePoint z;
  z.q.reserve(s.q.size() + 1);
  z.p.reserve(s.p.size() + 1);
  z.q.push_back(s.t);
  z.q.insert(z.q.end(), s.q.begin(), s.q.end());
  z.p.push_back(p0);
  z.p.insert(z.p.end(), s.p.begin(), s.p.end());
  return z;
}

// ---- Chart ---------------------------------------------------------------

Chart::Chart(std::size_t dim_q, std::vector<std::string> names)
    : dim_q_(dim_q), names_(std::move(names)) {
  if (dim_q_ < 1) throw DimensionMismatch("Chart: dim_q must be >= 1");
  if (names_.empty()) {
    for (std::size_t i = 0; i < dim_q_; ++i) names_.push_back("q" + std::to_string(i));
  }
  if (names_.size() != dim_q_) throw DimensionMismatch("Chart: name count");
}

Chart Chart::with_transition(MapFn forward, JacFn jacobian) const {
  Chart c = *this;
  c.forward_ = std::move(forward);
  c.jacobian_ = std::move(jacobian);
  return c;
}

Vec Chart::forward(std::span<const double> q) const {
  if (!forward_) throw Error("Chart: no transition configured");
  if (q.size() != dim_q_) throw DimensionMismatch("Chart::forward: point size");
  Vec out = forward_(q);
  if (out.size() != dim_q_) throw DimensionMismatch("Chart::forward: map output size");
  return out;
}

Mat Chart::jacobian(std::span<const double> q) const {
  if (!jacobian_) throw Error("Chart: no transition configured");
  Mat j = jacobian_(q);
  if (j.rows() != dim_q_ || j.cols() != dim_q_)
    throw DimensionMismatch("Chart::jacobian: shape");
  if (std::abs(determinant(j)) <= det_epsilon_)
    throw ChartSingularity("Chart::jacobian: determinant below epsilon");
  return j;
}

// ---- ScalarField -----------------------------------------------------------

ScalarField ScalarField::constant(std::size_t dim, double c) {
  return polynomial(Polynomial::constant(dim, c));
}

ScalarField ScalarField::polynomial(Polynomial p) {
  ScalarField f;
  f.dim_ = p.nvars();
  f.analytic_ = true;
  f.poly_grad_.reserve(f.dim_);
  for (std::size_t i = 0; i < f.dim_; ++i) f.poly_grad_.push_back(p.derivative(i));
  f.poly_ = std::move(p);
  return f;
}

ScalarField ScalarField::expression(std::size_t dim, Expression e) {
  ScalarField f;
  f.dim_ = dim;
  f.analytic_ = true;
  f.expr_grad_.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) f.expr_grad_.push_back(e.derivative(i));
  f.expr_ = std::move(e);
  return f;
}

ScalarField ScalarField::callable(std::size_t dim, ValueFn value, GradFn grad,
                                  double fd_step) {
  ScalarField f;
  f.dim_ = dim;
  f.value_ = std::move(value);
  f.grad_ = std::move(grad);
  f.analytic_ = static_cast<bool>(f.grad_);
  f.fd_step_ = fd_step;
  return f;
}

double ScalarField::operator()(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionMismatch("ScalarField: point size");
  if (poly_) return poly_->eval(x);
  if (expr_) return expr_->eval(x);
  return value_(x);
}

Vec ScalarField::gradient(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionMismatch("ScalarField::gradient: point size");
  Vec g(dim_, 0.0);
  if (poly_) {
    for (std::size_t i = 0; i < dim_; ++i) g[i] = poly_grad_[i].eval(x);
    return g;
  }
  if (expr_) {
    for (std::size_t i = 0; i < dim_; ++i) g[i] = expr_grad_[i].eval(x);
    return g;
  }
  if (grad_) {
    g = grad_(x);
    if (g.size() != dim_) throw DimensionMismatch("ScalarField::gradient: grad size");
    return g;
  }
  return fd_gradient(value_, x, fd_step_);
}

ScalarField ScalarField::partial(std::size_t i) const {
  if (i >= dim_) throw DimensionMismatch("ScalarField::partial: index");
  if (poly_) return polynomial(poly_->derivative(i));
  if (expr_) return expression(dim_, expr_->derivative(i));
  ScalarField self = *this;
  return callable(
      dim_, [self, i](std::span<const double> x) { return self.gradient(x)[i]; },
      nullptr, fd_step_);
}

// ---- Observable ------------------------------------------------------------

Observable Observable::from_poly(std::size_t dim_q, Polynomial f) {
  if (f.nvars() != 2 * dim_q)
    throw DimensionMismatch("Observable::from_poly: expected 2*dim_q variables");
  Observable o;
  o.dim_ = dim_q;
  o.analytic_ = true;
  o.poly_grad_.reserve(2 * dim_q);
  for (std::size_t i = 0; i < 2 * dim_q; ++i) o.poly_grad_.push_back(f.derivative(i));
  o.poly_ = std::move(f);
  return o;
}

Observable Observable::affine(std::vector<ScalarField> a, ScalarField b) {
  if (a.empty()) throw DimensionMismatch("Observable::affine: empty coefficient list");
  const std::size_t n = a.size();
  for (const ScalarField& f : a)
    if (f.dim() != n) throw DimensionMismatch("Observable::affine: coefficient dim");
  if (b.dim() != n) throw DimensionMismatch("Observable::affine: scalar term dim");

  Observable o;
  o.dim_ = n;
  o.analytic_ = b.analytic();
  for (const ScalarField& f : a) o.analytic_ = o.analytic_ && f.analytic();
  o.fd_step_ = b.fd_step();

  // When every field is a polynomial in q, keep the full polynomial in
  // (q, p) too, so brackets of this observable are exact.
  bool all_poly = b.poly() != nullptr;
  for (const ScalarField& f : a) all_poly = all_poly && f.poly() != nullptr;
  if (all_poly) {
    std::vector<std::size_t> qmap(n);
    for (std::size_t i = 0; i < n; ++i) qmap[i] = i;
    Polynomial full = b.poly()->remap(2 * n, qmap);
    for (std::size_t lam = 0; lam < n; ++lam) {
      Polynomial alam = a[lam].poly()->remap(2 * n, qmap);
      full += alam * Polynomial::variable(2 * n, n + lam);
    }
    o.poly_grad_.reserve(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) o.poly_grad_.push_back(full.derivative(i));
    o.poly_ = std::move(full);
  }
  AffineForm form;
  form.a = std::move(a);
  form.b = std::move(b);
  o.affine_ = std::move(form);
  return o;
}

Observable Observable::general(std::size_t dim_q, ValueFn value, GradFn grad_q,
                               GradFn grad_p, double fd_step) {
  Observable o;
  o.dim_ = dim_q;
  o.value_ = std::move(value);
  o.gq_ = std::move(grad_q);
  o.gp_ = std::move(grad_p);
  o.analytic_ = o.gq_ && o.gp_;
  o.fd_step_ = fd_step;
  return o;
}

Observable Observable::constant(std::size_t dim_q, double c) {
  std::vector<ScalarField> a(dim_q, ScalarField::constant(dim_q, 0.0));
  return affine(std::move(a), ScalarField::constant(dim_q, c));
}

Observable Observable::coordinate(std::size_t dim_q, std::size_t idx) {
  if (idx >= dim_q) throw DimensionMismatch("Observable::coordinate: index");
  std::vector<ScalarField> a(dim_q, ScalarField::constant(dim_q, 0.0));
  return affine(std::move(a),
                ScalarField::polynomial(Polynomial::variable(dim_q, idx)));
}

Observable Observable::momentum(std::size_t dim_q, std::size_t idx) {
  if (idx >= dim_q) throw DimensionMismatch("Observable::momentum: index");
  std::vector<ScalarField> a(dim_q, ScalarField::constant(dim_q, 0.0));
  a[idx] = ScalarField::constant(dim_q, 1.0);
  return affine(std::move(a), ScalarField::constant(dim_q, 0.0));
}

void Observable::check_point(const PhasePoint& z) const {
  if (z.q.size() != dim_ || z.p.size() != dim_)
    throw DimensionMismatch("Observable: phase point size");
}

namespace {
Vec pack_phase(const PhasePoint& z) {
  Vec x;
  x.reserve(2 * z.q.size());
  x.insert(x.end(), z.q.begin(), z.q.end());
  x.insert(x.end(), z.p.begin(), z.p.end());
  return x;
}
}  // namespace

double Observable::value(const PhasePoint& z) const {
  check_point(z);
  if (poly_) return poly_->eval(pack_phase(z));
  if (affine_) {
    double s = (affine_->b)(z.q);
    for (std::size_t lam = 0; lam < dim_; ++lam) s += (affine_->a[lam])(z.q) * z.p[lam];
    return s;
  }
  return value_(z);
}

Vec Observable::grad_q(const PhasePoint& z) const {
  check_point(z);
  if (poly_) {
    Vec x = pack_phase(z);
    Vec g(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) g[i] = poly_grad_[i].eval(x);
    return g;
  }
  if (affine_) {
    Vec g = affine_->b.gradient(z.q);
    for (std::size_t mu = 0; mu < dim_; ++mu) {
      Vec ga = affine_->a[mu].gradient(z.q);
      for (std::size_t lam = 0; lam < dim_; ++lam) g[lam] += ga[lam] * z.p[mu];
    }
    return g;
  }
  if (gq_) return gq_(z);
  PhasePoint zz = z;
  return fd_gradient(
      [&](std::span<const double> q) {
        PhasePoint w = zz;
        w.q.assign(q.begin(), q.end());
        return value_(w);
      },
      z.q, fd_step_);
}

Vec Observable::grad_p(const PhasePoint& z) const {
  check_point(z);
  if (poly_) {
    Vec x = pack_phase(z);
    Vec g(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) g[i] = poly_grad_[dim_ + i].eval(x);
    return g;
  }
  if (affine_) {
    Vec g(dim_, 0.0);
    for (std::size_t lam = 0; lam < dim_; ++lam) g[lam] = (affine_->a[lam])(z.q);
    return g;
  }
  if (gp_) return gp_(z);
  PhasePoint zz = z;
  return fd_gradient(
      [&](std::span<const double> p) {
        PhasePoint w = zz;
        w.p.assign(p.begin(), p.end());
        return value_(w);
      },
      z.p, fd_step_);
}

// ---- VerticalObservable ------------------------------------------------

VerticalObservable VerticalObservable::from_poly(std::size_t m, Polynomial f) {
  if (f.nvars() != 1 + 2 * m)
    throw DimensionMismatch("VerticalObservable::from_poly: expected 1+2m variables");
  VerticalObservable o;
  o.m_ = m;
  o.analytic_ = true;
  o.poly_grad_.reserve(1 + 2 * m);
  for (std::size_t i = 0; i < 1 + 2 * m; ++i) o.poly_grad_.push_back(f.derivative(i));
  o.poly_ = std::move(f);
  return o;
}

VerticalObservable VerticalObservable::affine(std::vector<ScalarField> a, ScalarField b) {
  const std::size_t m = a.size();
  if (m == 0) throw DimensionMismatch("VerticalObservable::affine: empty coefficients");
  for (const ScalarField& f : a)
    if (f.dim() != m + 1) throw DimensionMismatch("VerticalObservable::affine: field dim");
  if (b.dim() != m + 1) throw DimensionMismatch("VerticalObservable::affine: b dim");

  VerticalObservable o;
  o.m_ = m;
  o.analytic_ = b.analytic();
  for (const ScalarField& f : a) o.analytic_ = o.analytic_ && f.analytic();

  bool all_poly = b.poly() != nullptr;
  for (const ScalarField& f : a) all_poly = all_poly && f.poly() != nullptr;
  if (all_poly) {
    // Field variables (t, q^1..q^m) map to the first 1+m slots.
    std::vector<std::size_t> map(m + 1);
    for (std::size_t i = 0; i <= m; ++i) map[i] = i;
    Polynomial full = b.poly()->remap(1 + 2 * m, map);
    for (std::size_t k = 0; k < m; ++k) {
      Polynomial ak = a[k].poly()->remap(1 + 2 * m, map);
      full += ak * Polynomial::variable(1 + 2 * m, 1 + m + k);
    }
    o.poly_grad_.reserve(1 + 2 * m);
    for (std::size_t i = 0; i < 1 + 2 * m; ++i) o.poly_grad_.push_back(full.derivative(i));
    o.poly_ = std::move(full);
  }
  AffineForm form;
  form.a = std::move(a);
  form.b = std::move(b);
  o.affine_ = std::move(form);
  return o;
}

VerticalObservable VerticalObservable::general(std::size_t m, ValueFn value, TimeFn d_t,
                                               GradFn grad_q, GradFn grad_p,
                                               double fd_step) {
  VerticalObservable o;
  o.m_ = m;
  o.value_ = std::move(value);
  o.dt_ = std::move(d_t);
  o.gq_ = std::move(grad_q);
  o.gp_ = std::move(grad_p);
  o.analytic_ = o.dt_ && o.gq_ && o.gp_;
  o.fd_step_ = fd_step;
  return o;
}

VerticalObservable VerticalObservable::constant(std::size_t m, double c) {
  std::vector<ScalarField> a(m, ScalarField::constant(m + 1, 0.0));
  return affine(std::move(a), ScalarField::constant(m + 1, c));
}

VerticalObservable VerticalObservable::momentum(std::size_t m, std::size_t k) {
  if (k >= m) throw DimensionMismatch("VerticalObservable::momentum: index");
  std::vector<ScalarField> a(m, ScalarField::constant(m + 1, 0.0));
  a[k] = ScalarField::constant(m + 1, 1.0);
  return affine(std::move(a), ScalarField::constant(m + 1, 0.0));
}

VerticalObservable VerticalObservable::coordinate(std::size_t m, std::size_t k) {
  if (k >= m) throw DimensionMismatch("VerticalObservable::coordinate: index");
  std::vector<ScalarField> a(m, ScalarField::constant(m + 1, 0.0));
  return affine(std::move(a),
                ScalarField::polynomial(Polynomial::variable(m + 1, 1 + k)));
}

VerticalObservable VerticalObservable::time(std::size_t m) {
  std::vector<ScalarField> a(m, ScalarField::constant(m + 1, 0.0));
  return affine(std::move(a), ScalarField::polynomial(Polynomial::variable(m + 1, 0)));
}

Vec VerticalObservable::pack(const VerticalPhasePoint& s) const {
  if (s.q.size() != m_ || s.p.size() != m_)
    throw DimensionMismatch("VerticalObservable: point size");
  Vec x;
  x.reserve(1 + 2 * m_);
  x.push_back(s.t);
  x.insert(x.end(), s.q.begin(), s.q.end());
  x.insert(x.end(), s.p.begin(), s.p.end());
  return x;
}

double VerticalObservable::value(const VerticalPhasePoint& s) const {
  if (poly_) return poly_->eval(pack(s));
  if (affine_) {
    Vec tq;
    tq.reserve(1 + m_);
    tq.push_back(s.t);
    tq.insert(tq.end(), s.q.begin(), s.q.end());
    double v = (affine_->b)(tq);
    for (std::size_t k = 0; k < m_; ++k) v += (affine_->a[k])(tq)*s.p[k];
    return v;
  }
  return value_(s);
}

double VerticalObservable::d_t(const VerticalPhasePoint& s) const {
  if (poly_) return poly_grad_[0].eval(pack(s));
  if (affine_) {
    Vec tq;
    tq.push_back(s.t);
    tq.insert(tq.end(), s.q.begin(), s.q.end());
    double v = affine_->b.gradient(tq)[0];
    for (std::size_t k = 0; k < m_; ++k) v += affine_->a[k].gradient(tq)[0] * s.p[k];
    return v;
  }
  if (dt_) return dt_(s);
  VerticalPhasePoint ss = s;
  const double h = fd_step_ * std::max(1.0, std::abs(s.t));
  ss.t = s.t + h;
  double fp = value_(ss);
  ss.t = s.t - h;
  double fm = value_(ss);
  return (fp - fm) / (2.0 * h);
}

Vec VerticalObservable::grad_q(const VerticalPhasePoint& s) const {
  if (poly_) {
    Vec x = pack(s);
    Vec g(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) g[k] = poly_grad_[1 + k].eval(x);
    return g;
  }
  if (affine_) {
    Vec tq;
    tq.push_back(s.t);
    tq.insert(tq.end(), s.q.begin(), s.q.end());
    Vec gb = affine_->b.gradient(tq);
    Vec g(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) g[k] = gb[1 + k];
    for (std::size_t j = 0; j < m_; ++j) {
      Vec ga = affine_->a[j].gradient(tq);
      for (std::size_t k = 0; k < m_; ++k) g[k] += ga[1 + k] * s.p[j];
    }
    return g;
  }
  if (gq_) return gq_(s);
  VerticalPhasePoint ss = s;
  return fd_gradient(
      [&](std::span<const double> q) {
        VerticalPhasePoint w = ss;
        w.q.assign(q.begin(), q.end());
        return value_(w);
      },
      s.q, fd_step_);
}

Vec VerticalObservable::grad_p(const VerticalPhasePoint& s) const {
  if (poly_) {
    Vec x = pack(s);
    Vec g(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) g[k] = poly_grad_[1 + m_ + k].eval(x);
    return g;
  }
  if (affine_) {
    Vec tq;
    tq.push_back(s.t);
    tq.insert(tq.end(), s.q.begin(), s.q.end());
    Vec g(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) g[k] = (affine_->a[k])(tq);
    return g;
  }
  if (gp_) return gp_(s);
  VerticalPhasePoint ss = s;
  return fd_gradient(
      [&](std::span<const double> p) {
        VerticalPhasePoint w = ss;
        w.p.assign(p.begin(), p.end());
        return value_(w);
      },
      s.p, fd_step_);
}

// ---- MetricField -----------------------------------------------------------

MetricField MetricField::minkowski(std::size_t dim) {
  MetricField g;
  g.dim_ = dim;
  g.analytic_ = true;
  g.flat_ = true;
  g.inverse_ = [dim](std::span<const double>) {
    Mat m(dim, dim);
    m(0, 0) = 1.0;
    for (std::size_t i = 1; i < dim; ++i) m(i, i) = -1.0;
    return m;
  };
  g.d_inverse_ = [dim](std::span<const double>, std::size_t) { return Mat(dim, dim); };
  return g;
}

MetricField MetricField::from_callable(std::size_t dim, MatrixFn inverse,
                                       MatrixDerivFn d_inverse, double fd_step) {
  MetricField g;
  g.dim_ = dim;
  g.inverse_ = std::move(inverse);
  g.d_inverse_ = std::move(d_inverse);
  g.analytic_ = static_cast<bool>(g.d_inverse_);
  g.fd_step_ = fd_step;
  return g;
}

MetricField MetricField::from_expressions(std::vector<std::vector<Expression>> inverse,
                                          double fd_step) {
  const std::size_t dim = inverse.size();
  for (const auto& row : inverse)
    if (row.size() != dim) throw DimensionMismatch("MetricField: ragged component matrix");

  auto exprs = std::make_shared<std::vector<std::vector<Expression>>>(std::move(inverse));
  auto derivs = std::make_shared<std::vector<std::vector<std::vector<Expression>>>>();
  derivs->resize(dim);
  for (std::size_t lam = 0; lam < dim; ++lam) {
    (*derivs)[lam].resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j)
        (*derivs)[lam][i].push_back((*exprs)[i][j].derivative(lam));
    }
  }

  MetricField g;
  g.dim_ = dim;
  g.analytic_ = true;
  g.fd_step_ = fd_step;
  g.inverse_ = [exprs, dim](std::span<const double> q) {
    Mat m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) m(i, j) = (*exprs)[i][j].eval(q);
    return m;
  };
  g.d_inverse_ = [derivs, dim](std::span<const double> q, std::size_t lam) {
    Mat m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) m(i, j) = (*derivs)[lam][i][j].eval(q);
    return m;
  };
  return g;
}

Mat MetricField::inverse_at(std::span<const double> q) const {
  if (q.size() != dim_) throw DimensionMismatch("MetricField: point size");
  return inverse_(q);
}

Mat MetricField::metric_at(std::span<const double> q) const {
  return invert_dense(inverse_at(q));
}

Mat MetricField::inverse_partial_at(std::span<const double> q, std::size_t lambda) const {
  if (lambda >= dim_) throw DimensionMismatch("MetricField: derivative index");
  if (d_inverse_) return d_inverse_(q, lambda);
  Vec x(q.begin(), q.end());
  const double h = fd_step_ * std::max(1.0, std::abs(q[lambda]));
  x[lambda] = q[lambda] + h;
  Mat gp = inverse_(x);
  x[lambda] = q[lambda] - h;
  Mat gm = inverse_(x);
  Mat out(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(i, j) = (gp(i, j) - gm(i, j)) / (2.0 * h);
  return out;
}

void MetricField::validate_at(std::span<const double> q) const {
  Mat gi = inverse_at(q);
  double scale = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) scale = std::max(scale, std::abs(gi(i, j)));
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i + 1; j < dim_; ++j)
      if (std::abs(gi(i, j) - gi(j, i)) > 1e-10 * std::max(1.0, scale))
        throw Error("MetricField: inverse components not symmetric");
  if (gi(0, 0) <= 0.0) throw Error("MetricField: g^00 must be positive on the chart");
  (void)invert_dense(gi);  // throws MetricInversionFailure when singular
}

// ---- Poisson structure -------------------------------------------------

double poisson_bracket(const Observable& f, const Observable& g, const PhasePoint& z) {
  if (f.dim_q() != g.dim_q())
    throw DimensionMismatch("poisson_bracket: observable dimensions differ");
  Vec fq = f.grad_q(z), fp = f.grad_p(z);
  Vec gq = g.grad_q(z), gp = g.grad_p(z);
  if (!all_finite(fq) || !all_finite(fp) || !all_finite(gq) || !all_finite(gp))
    throw NonFiniteValue("poisson_bracket: non-finite gradient");
  double s = 0.0;
  for (std::size_t lam = 0; lam < f.dim_q(); ++lam)
    s += fp[lam] * gq[lam] - fq[lam] * gp[lam];
  return s;
}

double poisson_bracket_vertical(const VerticalObservable& f, const VerticalObservable& g,
                                const VerticalPhasePoint& s) {
  if (f.dim_m() != g.dim_m())
    throw DimensionMismatch("poisson_bracket_vertical: dimensions differ");
  Vec fq = f.grad_q(s), fp = f.grad_p(s);
  Vec gq = g.grad_q(s), gp = g.grad_p(s);
  if (!all_finite(fq) || !all_finite(fp) || !all_finite(gq) || !all_finite(gp))
    throw NonFiniteValue("poisson_bracket_vertical: non-finite gradient");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.dim_m(); ++k)
    acc += fp[k] * gq[k] - fq[k] * gp[k];
  return acc;
}

Observable poisson_bracket_poly(const Observable& f, const Observable& g) {
  if (f.dim_q() != g.dim_q())
    throw DimensionMismatch("poisson_bracket_poly: observable dimensions differ");
  const Polynomial* pf = f.poly();
  const Polynomial* pg = g.poly();
  if (!pf || !pg)
    throw AnalyticGradientRequired("poisson_bracket_poly: polynomial backing required");
  const std::size_t n = f.dim_q();
  Polynomial out(2 * n);
  for (std::size_t lam = 0; lam < n; ++lam) {
    out += pf->derivative(n + lam) * pg->derivative(lam);
    out -= pf->derivative(lam) * pg->derivative(n + lam);
  }
  return Observable::from_poly(n, std::move(out));
}

Observable observable_product(const Observable& f, const Observable& g) {
  if (f.dim_q() != g.dim_q())
    throw DimensionMismatch("observable_product: dimensions differ");
  if (f.poly() && g.poly())
    return Observable::from_poly(f.dim_q(), (*f.poly()) * (*g.poly()));
  Observable fc = f, gc = g;
  auto value = [fc, gc](const PhasePoint& z) { return fc.value(z) * gc.value(z); };
  Observable::GradFn gq, gp;
  if (f.analytic() && g.analytic()) {
    gq = [fc, gc](const PhasePoint& z) {
      Vec a = fc.grad_q(z), b = gc.grad_q(z);
      double fv = fc.value(z), gv = gc.value(z);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] * gv + fv * b[i];
      return a;
    };
    gp = [fc, gc](const PhasePoint& z) {
      Vec a = fc.grad_p(z), b = gc.grad_p(z);
      double fv = fc.value(z), gv = gc.value(z);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] * gv + fv * b[i];
      return a;
    };
  }
  return Observable::general(f.dim_q(), value, gq, gp,
                             std::max(f.fd_step(), g.fd_step()));
}

Observable affine_bracket(const Observable& f, const Observable& g) {
  const Observable::AffineForm* af = f.affine_form();
  const Observable::AffineForm* ag = g.affine_form();
  if (!af || !ag) throw QuadraticRequired("affine_bracket: both observables must be affine");
  if (f.dim_q() != g.dim_q())
    throw DimensionMismatch("affine_bracket: observable dimensions differ");
  if (!f.analytic() || !g.analytic())
    throw AnalyticGradientRequired("affine_bracket: analytic coefficient partials required");
  const std::size_t n = f.dim_q();

  bool all_poly = af->b.poly() && ag->b.poly();
  for (std::size_t i = 0; i < n; ++i)
    all_poly = all_poly && af->a[i].poly() && ag->a[i].poly();

  std::vector<ScalarField> out_a;
  ScalarField out_b;
  if (all_poly) {
    for (std::size_t mu = 0; mu < n; ++mu) {
      Polynomial c(n);
      for (std::size_t lam = 0; lam < n; ++lam) {
        c += (*af->a[lam].poly()) * ag->a[mu].poly()->derivative(lam);
        c -= (*ag->a[lam].poly()) * af->a[mu].poly()->derivative(lam);
      }
      out_a.push_back(ScalarField::polynomial(std::move(c)));
    }
    Polynomial c(n);
    for (std::size_t lam = 0; lam < n; ++lam) {
      c += (*af->a[lam].poly()) * ag->b.poly()->derivative(lam);
      c -= (*ag->a[lam].poly()) * af->b.poly()->derivative(lam);
    }
    out_b = ScalarField::polynomial(std::move(c));
  } else {
    // Coefficient values are exact compositions of analytic pieces; their
    // own partials fall back to finite differences at the next level.
    auto a1 = std::make_shared<std::vector<ScalarField>>(af->a);
    auto a2 = std::make_shared<std::vector<ScalarField>>(ag->a);
    for (std::size_t mu = 0; mu < n; ++mu) {
      out_a.push_back(ScalarField::callable(
          n,
          [a1, a2, mu, n](std::span<const double> q) {
            double s = 0.0;
            Vec g2 = (*a2)[mu].gradient(q);
            Vec g1 = (*a1)[mu].gradient(q);
            for (std::size_t lam = 0; lam < n; ++lam)
              s += (*a1)[lam](q)*g2[lam] - (*a2)[lam](q)*g1[lam];
            return s;
          },
          nullptr, std::max(f.fd_step(), g.fd_step())));
    }
    ScalarField b1 = af->b, b2 = ag->b;
    out_b = ScalarField::callable(
        n,
        [a1, a2, b1, b2, n](std::span<const double> q) {
          double s = 0.0;
          Vec gb2 = b2.gradient(q);
          Vec gb1 = b1.gradient(q);
          for (std::size_t lam = 0; lam < n; ++lam)
            s += (*a1)[lam](q)*gb2[lam] - (*a2)[lam](q)*gb1[lam];
          return s;
        },
        nullptr, std::max(f.fd_step(), g.fd_step()));
  }
  return Observable::affine(std::move(out_a), std::move(out_b));
}

PhaseTangent hamiltonian_vector_field(const Observable& f, const PhasePoint& z) {
  PhaseTangent u;
  u.dq = f.grad_p(z);
  u.dp = f.grad_q(z);
  for (double& v : u.dp) v = -v;
  if (!all_finite(u.dq) || !all_finite(u.dp))
    throw NonFiniteValue("hamiltonian_vector_field: non-finite gradient");
  return u;
}

namespace {
Observable bracket_as_observable(const Observable& g, const Observable& h) {
  if (g.poly() && h.poly()) return poisson_bracket_poly(g, h);
  Observable gc = g, hc = h;
  return Observable::general(
      g.dim_q(),
      [gc, hc](const PhasePoint& z) { return poisson_bracket(gc, hc, z); }, nullptr,
      nullptr, std::max(g.fd_step(), h.fd_step()));
}
}  // namespace

double jacobi_residual(const Observable& f, const Observable& g, const Observable& h,
                       const PhasePoint& z) {
  Observable gh = bracket_as_observable(g, h);
  Observable hf = bracket_as_observable(h, f);
  Observable fg = bracket_as_observable(f, g);
  return std::abs(poisson_bracket(f, gh, z) + poisson_bracket(g, hf, z) +
                  poisson_bracket(h, fg, z));
}

Observable pullback_to_homogeneous(const VerticalObservable& f) {
  const std::size_t m = f.dim_m();
  const std::size_t n = m + 1;
  if (f.affine_form()) {
    // Vertical affine pulls back to an affine observable with a^0 = 0; the
    // field variables (t, q^k) coincide with (q^0, q^k).
    std::vector<ScalarField> a;
    a.push_back(ScalarField::constant(n, 0.0));
    for (const ScalarField& field : f.affine_form()->a) a.push_back(field);
    return Observable::affine(std::move(a), f.affine_form()->b);
  }
  if (f.poly()) {
    // (t, q^1..q^m, p_1..p_m) -> (q^0..q^m, p_0..p_m), skipping p_0.
    std::vector<std::size_t> map(1 + 2 * m);
    map[0] = 0;
    for (std::size_t k = 0; k < m; ++k) {
      map[1 + k] = 1 + k;
      map[1 + m + k] = n + 1 + k;
    }
    return Observable::from_poly(n, f.poly()->remap(2 * n, map));
  }
  VerticalObservable fc = f;
  Observable::GradFn gq, gp;
  if (f.analytic()) {
    gq = [fc](const PhasePoint& z) {
      VerticalPhasePoint s = project_vertical(z);
      Vec g(z.q.size(), 0.0);
      g[0] = fc.d_t(s);
      Vec gs = fc.grad_q(s);
      for (std::size_t k = 0; k < gs.size(); ++k) g[1 + k] = gs[k];
      return g;
    };
    gp = [fc](const PhasePoint& z) {
      VerticalPhasePoint s = project_vertical(z);
      Vec g(z.p.size(), 0.0);
      Vec gs = fc.grad_p(s);
      for (std::size_t k = 0; k < gs.size(); ++k) g[1 + k] = gs[k];
      return g;
    };
  }
  return Observable::general(
      n, [fc](const PhasePoint& z) { return fc.value(project_vertical(z)); }, gq, gp);
}

}  // namespace gqm
