#include "gqmech/kinematics.hpp"

#include <cmath>

#include "gqmech/errors.hpp"

namespace gqm {

JetVelocity::JetVelocity(double q0_in, Vec q_in, Vec v_in)
    : q0(q0_in), q(std::move(q_in)), v(std::move(v_in)) {
  if (q.size() != v.size())
    throw DimensionMismatch("JetVelocity: q and v must have equal length");
  if (!std::isfinite(q0) || !all_finite(q) || !all_finite(v))
    throw NonFiniteValue("JetVelocity: non-finite component");
}

TangentVector::TangentVector(Vec q_in, Vec qdot_in)
    : q(std::move(q_in)), qdot(std::move(qdot_in)) {
  if (q.size() != qdot.size())
    throw DimensionMismatch("TangentVector: q and qdot must have equal length");
  if (!all_finite(q) || !all_finite(qdot))
    throw NonFiniteValue("TangentVector: non-finite component");
}

JetVelocity jet_transition(const JetVelocity& v, const Chart& chart, double epsilon) {
  const std::size_t m = v.dim_m();
  if (chart.dim_q() != m + 1) throw DimensionMismatch("jet_transition: chart dimension");
  Vec point;
  point.reserve(m + 1);
  point.push_back(v.q0);
  point.insert(point.end(), v.q.begin(), v.q.end());

  Vec image = chart.forward(point);
  Mat jac = chart.jacobian(point);

  double scale = std::abs(jac(0, 0));
  for (std::size_t k = 0; k < m; ++k) scale = std::max(scale, std::abs(jac(0, 1 + k)));
  double den = jac(0, 0);
  for (std::size_t k = 0; k < m; ++k) den += v.v[k] * jac(0, 1 + k);
  if (std::abs(den) <= epsilon * std::max(1.0, scale))
    throw DenominatorVanishes("jet_transition: transition denominator vanished");

  JetVelocity out;
  out.q0 = image[0];
  out.q.assign(image.begin() + 1, image.end());
  out.v.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double num = jac(1 + k, 0);
    for (std::size_t j = 0; j < m; ++j) num += v.v[j] * jac(1 + k, 1 + j);
    out.v[k] = num / den;
  }
  return out;
}

JetVelocity lorentz_boost_velocity(const JetVelocity& v, double alpha, double epsilon) {
  if (v.dim_m() < 1) throw DimensionMismatch("lorentz_boost_velocity: need >= 1 axis");
  const double ch = std::cosh(alpha);
  const double sh = std::sinh(alpha);
  const double den = ch - v.v[0] * sh;
  if (std::abs(den) <= epsilon * std::max(1.0, std::abs(ch)))
    throw DenominatorVanishes("lorentz_boost_velocity: denominator vanished");
  JetVelocity out = v;
  out.q0 = v.q0 * ch - v.q[0] * sh;
  out.q[0] = -v.q0 * sh + v.q[0] * ch;
  out.v[0] = (-sh + v.v[0] * ch) / den;
  for (std::size_t k = 1; k < v.dim_m(); ++k) out.v[k] = v.v[k] / den;
  return out;
}

Chart lorentz_boost_chart(double alpha, std::size_t dim_q) {
  if (dim_q < 2) throw DimensionMismatch("lorentz_boost_chart: need dim_q >= 2");
  const double ch = std::cosh(alpha);
  const double sh = std::sinh(alpha);
  Chart base(dim_q);
  return base.with_transition(
      [ch, sh, dim_q](std::span<const double> q) {
        Vec out(q.begin(), q.end());
        out[0] = q[0] * ch - q[1] * sh;
        out[1] = -q[0] * sh + q[1] * ch;
        return out;
      },
      [ch, sh, dim_q](std::span<const double>) {
        Mat j = Mat::identity(dim_q);
        j(0, 0) = ch;
        j(0, 1) = -sh;
        j(1, 0) = -sh;
        j(1, 1) = ch;
        return j;
      });
}

TangentVector lambda_lift(const JetVelocity& v, double qdot0) {
  if (!std::isfinite(qdot0)) throw NonFiniteValue("lambda_lift: qdot0 not finite");
  TangentVector w;
  w.q.reserve(v.dim_m() + 1);
  w.qdot.reserve(v.dim_m() + 1);
  w.q.push_back(v.q0);
  w.q.insert(w.q.end(), v.q.begin(), v.q.end());
  w.qdot.push_back(qdot0);
  for (double vk : v.v) w.qdot.push_back(qdot0 * vk);
  return w;
}

JetVelocity rho_project(const TangentVector& w, double epsilon) {
  if (w.dim_q() < 1) throw DimensionMismatch("rho_project: empty vector");
  double scale = norm_inf(w.qdot);
  if (std::abs(w.qdot[0]) <= epsilon * std::max(1.0, scale))
    throw ChartSingularity("rho_project: qdot^0 vanishes in this chart");
  JetVelocity out;
  out.q0 = w.q[0];
  out.q.assign(w.q.begin() + 1, w.q.end());
  out.v.resize(w.dim_q() - 1);
  for (std::size_t k = 0; k + 1 < w.dim_q(); ++k) out.v[k] = w.qdot[1 + k] / w.qdot[0];
  return out;
}

double hyperboloid_residual(const TangentVector& w, const MetricField& g) {
  if (g.dim() != w.dim_q()) throw DimensionMismatch("hyperboloid_residual: dimensions");
  Mat gmat = g.metric_at(w.q);
  double s = 0.0;
  for (std::size_t mu = 0; mu < w.dim_q(); ++mu)
    for (std::size_t nu = 0; nu < w.dim_q(); ++nu)
      s += gmat(mu, nu) * w.qdot[mu] * w.qdot[nu];
  return s - 1.0;
}

TangentVector boost_tangent(const TangentVector& w, double alpha) {
  if (w.dim_q() < 2) throw DimensionMismatch("boost_tangent: need dim >= 2");
  const double ch = std::cosh(alpha);
  const double sh = std::sinh(alpha);
  TangentVector out = w;
  out.q[0] = w.q[0] * ch - w.q[1] * sh;
  out.q[1] = -w.q[0] * sh + w.q[1] * ch;
  out.qdot[0] = w.qdot[0] * ch - w.qdot[1] * sh;
  out.qdot[1] = -w.qdot[0] * sh + w.qdot[1] * ch;
  return out;
}

Vec boost_covector(const Vec& p, double alpha) {
  if (p.size() < 2) throw DimensionMismatch("boost_covector: need dim >= 2");
  const double ch = std::cosh(alpha);
  const double sh = std::sinh(alpha);
  Vec out = p;
  out[0] = ch * p[0] + sh * p[1];
  out[1] = sh * p[0] + ch * p[1];
  return out;
}

PhasePoint legendre_free_mass(const JetVelocity& v, double mass) {
  if (mass <= 0.0) throw Error("legendre_free_mass: mass must be positive");
  double v2 = 0.0;
  for (double vk : v.v) v2 += vk * vk;
  if (v2 >= 1.0)
    throw SuperluminalInput("legendre_free_mass: velocity outside the unit ball");
  const double gamma = 1.0 / std::sqrt(1.0 - v2);
  PhasePoint z;
  z.q.reserve(v.dim_m() + 1);
  z.p.reserve(v.dim_m() + 1);
  z.q.push_back(v.q0);
  z.q.insert(z.q.end(), v.q.begin(), v.q.end());
  z.p.push_back(-mass * gamma);
  for (double vk : v.v) z.p.push_back(mass * vk * gamma);
  return z;
}

}  // namespace gqm
