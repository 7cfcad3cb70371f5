#ifndef GQMECH_KINEMATICS_HPP
#define GQMECH_KINEMATICS_HPP

#include <cstddef>

#include "gqmech/phase.hpp"

namespace gqm {

// Three-velocity (jet) coordinates over one chart: base point (q^0, q^k)
// and components v^k = dq^k/dq^0.
struct JetVelocity {
  double q0 = 0.0;
  Vec q;  // spatial coordinates, length m
  Vec v;  // three-velocity components, length m

  JetVelocity() = default;
  JetVelocity(double q0_in, Vec q_in, Vec v_in);
  std::size_t dim_m() const { return v.size(); }
};

struct TangentVector {
  Vec q;     // length m+1
  Vec qdot;  // length m+1

  TangentVector() = default;
  TangentVector(Vec q_in, Vec qdot_in);
  std::size_t dim_q() const { return q.size(); }
};

// Transition law of jet coordinates under a chart transition. Throws
// DenominatorVanishes when the projective-coordinate denominator drops
// below epsilon (the point leaves the chart overlap).
JetVelocity jet_transition(const JetVelocity& v, const Chart& chart,
                           double epsilon = 1e-12);

// Special-relativistic boost of three-velocities along axis 1 with
// rapidity alpha (closed form of the boost-chart transition law).
JetVelocity lorentz_boost_velocity(const JetVelocity& v, double alpha,
                                   double epsilon = 1e-12);

// Chart for Minkowski coordinates whose transition is the rapidity-alpha
// boost along axis 1; Jacobian is constant.
Chart lorentz_boost_chart(double alpha, std::size_t dim_q = 4);

// Line through zero with slope (1, v^k), scaled by qdot0.
TangentVector lambda_lift(const JetVelocity& v, double qdot0);

// Converse projection v^k = qdot^k / qdot^0; inverse of lambda_lift for
// any nonzero scale. Throws ChartSingularity near qdot^0 = 0.
JetVelocity rho_project(const TangentVector& w, double epsilon = 1e-12);

// g_{mu nu}(q) qdot^mu qdot^nu - 1; zero on the unit hyperboloid bundle.
double hyperboloid_residual(const TangentVector& w, const MetricField& g);

// Boost of a tangent vector (vector transformation rule) and of a momentum
// covector (inverse-transpose rule) along axis 1.
TangentVector boost_tangent(const TangentVector& w, double alpha);
Vec boost_covector(const Vec& p, double alpha);

// Legendre map of the free-mass Lagrangian: p_i = m v^i / sqrt(1 - v^2),
// p_0 = -m / sqrt(1 - v^2). Output satisfies p_0^2 - sum p_i^2 = m^2.
// Throws SuperluminalInput outside the regularity ball sum (v^i)^2 < 1.
PhasePoint legendre_free_mass(const JetVelocity& v, double mass);

}  // namespace gqm

#endif  // GQMECH_KINEMATICS_HPP
