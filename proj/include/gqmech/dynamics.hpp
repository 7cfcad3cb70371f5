#ifndef GQMECH_DYNAMICS_HPP
#define GQMECH_DYNAMICS_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gqmech/phase.hpp"

namespace gqm {

enum class SystemKind { NonRelativistic, Relativistic };

// A mechanical system presented as a flow on the homogeneous phase space.
// Non-relativistic systems carry their vertical Hamiltonian plus the
// homogeneous generator p_0 + H; relativistic systems carry the Hamiltonian
// on T*Q together with the background metric defining the mass shell.
struct HamiltonianSystem {
  SystemKind kind = SystemKind::Relativistic;
  std::string name;
  std::size_t dim_q = 0;  // homogeneous configuration dimension m+1

  Observable generator;          // flow generator on T*Q
  VerticalObservable h_vertical; // non-relativistic Hamiltonian (kind NonRel)
  MetricField metric;            // background metric (kind Rel)

  double mass = 0.0;
  double charge = 0.0;
  std::vector<ScalarField> potential;  // electromagnetic covector A_mu, if any
};

// Built-in systems.
HamiltonianSystem free_special(double mass, std::size_t dim_q = 4);
HamiltonianSystem charged_em(double mass, double charge,
                             std::vector<ScalarField> potential);
HamiltonianSystem curved_metric(double mass, MetricField metric);
HamiltonianSystem nonrel_oscillator(double omega, std::size_t spatial_dim = 1);
HamiltonianSystem nonrel_free(std::size_t spatial_dim = 1);

// Covector potential of a constant magnetic field B along the last axis,
// symmetric gauge (polynomial components, analytic everywhere).
std::vector<ScalarField> constant_magnetic_potential(double b_field,
                                                     std::size_t dim_q = 4);

// Diagonal weak-wave inverse-metric components used by the curved example
// system, as expression strings in the coordinates q0..q3.
std::vector<std::vector<std::string>> example_curved_metric_expressions(
    double epsilon = 0.05);
MetricField example_curved_metric(double epsilon = 0.05);

struct VerticalTangent {
  double dt = 1.0;
  Vec dq;
  Vec dp;
};

// Hamiltonian connection on V*Q: dt = 1, dq^k = dH/dp_k, dp_k = -dH/dq^k.
VerticalTangent nonrel_vector_field(const HamiltonianSystem& sys,
                                    const VerticalPhasePoint& s);

// Flow vector field on T*Q: dq = dG/dp, dp = -dG/dq for the system's
// generator G. For relativistic systems this is the constrained Hamilton
// flow; for non-relativistic systems it is the homogeneous lift (dq^0 = 1).
PhaseTangent flow_vector_field(const HamiltonianSystem& sys, const PhasePoint& z);

// Constraint value at a point: p_0 + H(t,q,p) (non-relativistic) or
// g_{mu nu} (dH/dp_mu)(dH/dp_nu) - 1 (relativistic).
double constraint_residual(const HamiltonianSystem& sys, const PhasePoint& z);

// Bracket of the relativistic Hamiltonian with its own constraint function,
// {H, g dH dH}_T. Vanishing means the flow preserves the constraint.
// Second derivatives enter through finite differences on the constraint.
double constraint_invariance_residual(const HamiltonianSystem& sys, const PhasePoint& z,
                                      double fd_step = 3e-5);

// Numerical contraction of the presymplectic form dH on V*Q with the
// Hamiltonian connection; all components vanish for the true connection.
// A non-null gamma evaluates the contraction against that field instead.
Vec contraction_residual_nonrel(const HamiltonianSystem& sys, const VerticalPhasePoint& s,
                                const VerticalTangent* gamma = nullptr);

// Solves the constraint for p_0 given spatial momenta (the W+ branch for
// relativistic systems; the section value -H for non-relativistic ones).
double on_shell_p0(const HamiltonianSystem& sys, const Vec& q, const Vec& p_spatial);
PhasePoint lift_on_section(const HamiltonianSystem& sys, const VerticalPhasePoint& s);

enum class IntegratorMethod { ExplicitRK4, ImplicitMidpoint };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::ExplicitRK4;
  double step = 1e-3;
  double implicit_tol = 1e-13;
  int implicit_max_iter = 60;
  int record_every = 1;
  double admission_tol = 1e-9;      // relative, on the initial constraint
  bool project_each_step = false;   // momentum rescaling toward the shell
  void validate() const;
};

struct TrajectoryRecord {
  Vec parameter;  // flow parameter s (coordinate time for non-relativistic)
  std::vector<PhasePoint> states;
  Vec residuals;  // constraint residual per recorded state
  std::vector<std::pair<std::string, Vec>> conserved;
  std::vector<std::string> warnings;

  std::size_t size() const { return parameter.size(); }
  void write_csv(std::ostream& os) const;
  std::string to_json_string(int indent = -1) const;
};

// Integrates the flow for the given duration; samples every record_every
// steps (first and last states always included).
TrajectoryRecord integrate(const HamiltonianSystem& sys, const PhasePoint& z0,
                           const IntegratorConfig& cfg, double duration);

}  // namespace gqm

#endif  // GQMECH_DYNAMICS_HPP
