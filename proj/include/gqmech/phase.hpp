#ifndef GQMECH_PHASE_HPP
#define GQMECH_PHASE_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gqmech/expr.hpp"
#include "gqmech/numeric.hpp"
#include "gqmech/poly.hpp"

namespace gqm {

// Default finite-difference step, scaled per coordinate by max(1, |x|).
inline constexpr double kDefaultFdStep = 1e-6;

Vec fd_gradient(const std::function<double(std::span<const double>)>& f,
                std::span<const double> x, double step);

// Point of the homogeneous phase space: positions q^0..q^m and conjugate
// momenta p_0..p_m.
struct PhasePoint {
  Vec q;
  Vec p;

  PhasePoint() = default;
  PhasePoint(Vec q_in, Vec p_in);
  std::size_t dim_q() const { return q.size(); }
  void check_finite() const;
};

// Point of the vertical (momentum) phase space: time t plus (q^k, p_k).
struct VerticalPhasePoint {
  double t = 0.0;
  Vec q;
  Vec p;

  VerticalPhasePoint() = default;
  VerticalPhasePoint(double t_in, Vec q_in, Vec p_in);
  std::size_t dim_m() const { return q.size(); }
};

// The bundle projection dropping p_0, and the section lift going back.
VerticalPhasePoint project_vertical(const PhasePoint& z);
PhasePoint lift_homogeneous(const VerticalPhasePoint& s, double p0);

// One coordinate chart with an optional transition to a second chart.
class Chart {
 public:
  using MapFn = std::function<Vec(std::span<const double>)>;
  using JacFn = std::function<Mat(std::span<const double>)>;

  explicit Chart(std::size_t dim_q, std::vector<std::string> names = {});

  std::size_t dim_q() const { return dim_q_; }
  const std::vector<std::string>& names() const { return names_; }

  Chart with_transition(MapFn forward, JacFn jacobian) const;
  bool has_transition() const { return static_cast<bool>(forward_); }
  Vec forward(std::span<const double> q) const;
  // Jacobian J(i,j) = d(new q^i)/d(old q^j); checked for invertibility.
  Mat jacobian(std::span<const double> q) const;

  double det_epsilon() const { return det_epsilon_; }

 private:
  std::size_t dim_q_;
  std::vector<std::string> names_;
  MapFn forward_;
  JacFn jacobian_;
  double det_epsilon_ = 1e-12;
};

// Scalar field on configuration space. Polynomial- and expression-backed
// fields differentiate symbolically; plain callables fall back to central
// differences unless an analytic gradient callable is supplied.
class ScalarField {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<Vec(std::span<const double>)>;

  ScalarField() = default;

  static ScalarField constant(std::size_t dim, double c);
  static ScalarField polynomial(Polynomial p);
  static ScalarField expression(std::size_t dim, Expression e);
  static ScalarField callable(std::size_t dim, ValueFn value, GradFn grad = nullptr,
                              double fd_step = kDefaultFdStep);

  bool valid() const { return dim_ != static_cast<std::size_t>(-1); }
  std::size_t dim() const { return dim_; }
  bool analytic() const { return analytic_; }
  double fd_step() const { return fd_step_; }
  const Polynomial* poly() const { return poly_ ? &*poly_ : nullptr; }

  double operator()(std::span<const double> x) const;
  Vec gradient(std::span<const double> x) const;
  // Derivative field d(this)/dx_i; analytic backings stay analytic.
  ScalarField partial(std::size_t i) const;

 private:
  std::size_t dim_ = static_cast<std::size_t>(-1);
  bool analytic_ = false;
  double fd_step_ = kDefaultFdStep;
  std::optional<Polynomial> poly_;
  std::optional<Expression> expr_;
  std::vector<Expression> expr_grad_;
  std::vector<Polynomial> poly_grad_;
  ValueFn value_;
  GradFn grad_;
};

// Observable on the homogeneous phase space T*Q. Either affine in momenta
// (a^lambda(q) p_lambda + b(q), the quantizable class) or a general callable.
// Polynomial-backed observables support exact bracket algebra.
class Observable {
 public:
  struct AffineForm {
    std::vector<ScalarField> a;  // one field per momentum component
    ScalarField b;
  };

  using ValueFn = std::function<double(const PhasePoint&)>;
  using GradFn = std::function<Vec(const PhasePoint&)>;

  Observable() = default;

  static Observable from_poly(std::size_t dim_q, Polynomial f);
  static Observable affine(std::vector<ScalarField> a, ScalarField b);
  static Observable general(std::size_t dim_q, ValueFn value, GradFn grad_q = nullptr,
                            GradFn grad_p = nullptr, double fd_step = kDefaultFdStep);
  static Observable constant(std::size_t dim_q, double c);
  static Observable coordinate(std::size_t dim_q, std::size_t idx);
  static Observable momentum(std::size_t dim_q, std::size_t idx);

  bool valid() const { return dim_ != static_cast<std::size_t>(-1); }
  std::size_t dim_q() const { return dim_; }
  bool analytic() const { return analytic_; }
  double fd_step() const { return fd_step_; }
  const AffineForm* affine_form() const { return affine_ ? &*affine_ : nullptr; }
  const Polynomial* poly() const { return poly_ ? &*poly_ : nullptr; }

  double value(const PhasePoint& z) const;
  Vec grad_q(const PhasePoint& z) const;
  Vec grad_p(const PhasePoint& z) const;

 private:
  void check_point(const PhasePoint& z) const;

  std::size_t dim_ = static_cast<std::size_t>(-1);
  bool analytic_ = false;
  double fd_step_ = kDefaultFdStep;
  std::optional<AffineForm> affine_;
  std::optional<Polynomial> poly_;  // over (q_0..q_m, p_0..p_m)
  std::vector<Polynomial> poly_grad_;
  ValueFn value_;
  GradFn gq_, gp_;
};

// Observable on the vertical phase space V*Q: a function of (t, q^k, p_k).
class VerticalObservable {
 public:
  struct AffineForm {
    std::vector<ScalarField> a;  // m fields over (t, q^1..q^m)
    ScalarField b;
  };

  using ValueFn = std::function<double(const VerticalPhasePoint&)>;
  using GradFn = std::function<Vec(const VerticalPhasePoint&)>;
  using TimeFn = std::function<double(const VerticalPhasePoint&)>;

  VerticalObservable() = default;

  // Polynomial over variables ordered (t, q^1..q^m, p_1..p_m).
  static VerticalObservable from_poly(std::size_t m, Polynomial f);
  static VerticalObservable affine(std::vector<ScalarField> a, ScalarField b);
  static VerticalObservable general(std::size_t m, ValueFn value, TimeFn d_t = nullptr,
                                    GradFn grad_q = nullptr, GradFn grad_p = nullptr,
                                    double fd_step = kDefaultFdStep);
  static VerticalObservable constant(std::size_t m, double c);
  static VerticalObservable momentum(std::size_t m, std::size_t k);
  static VerticalObservable coordinate(std::size_t m, std::size_t k);
  static VerticalObservable time(std::size_t m);

  bool valid() const { return m_ != static_cast<std::size_t>(-1); }
  std::size_t dim_m() const { return m_; }
  bool analytic() const { return analytic_; }
  const AffineForm* affine_form() const { return affine_ ? &*affine_ : nullptr; }
  const Polynomial* poly() const { return poly_ ? &*poly_ : nullptr; }

  double value(const VerticalPhasePoint& s) const;
  double d_t(const VerticalPhasePoint& s) const;
  Vec grad_q(const VerticalPhasePoint& s) const;
  Vec grad_p(const VerticalPhasePoint& s) const;

 private:
  Vec pack(const VerticalPhasePoint& s) const;

  std::size_t m_ = static_cast<std::size_t>(-1);
  bool analytic_ = false;
  double fd_step_ = kDefaultFdStep;
  std::optional<AffineForm> affine_;
  std::optional<Polynomial> poly_;
  std::vector<Polynomial> poly_grad_;
  ValueFn value_;
  TimeFn dt_;
  GradFn gq_, gp_;
};

// Position-dependent inverse metric g^{mu nu}(q), signature (+,-,...,-).
class MetricField {
 public:
  using MatrixFn = std::function<Mat(std::span<const double>)>;
  using MatrixDerivFn = std::function<Mat(std::span<const double>, std::size_t)>;

  MetricField() = default;

  static MetricField minkowski(std::size_t dim);
  static MetricField from_callable(std::size_t dim, MatrixFn inverse,
                                   MatrixDerivFn d_inverse = nullptr,
                                   double fd_step = kDefaultFdStep);
  // Inverse components as expressions of the coordinate names.
  static MetricField from_expressions(std::vector<std::vector<Expression>> inverse,
                                      double fd_step = kDefaultFdStep);

  bool valid() const { return dim_ != 0; }
  std::size_t dim() const { return dim_; }
  bool analytic() const { return analytic_; }
  bool flat() const { return flat_; }

  Mat inverse_at(std::span<const double> q) const;   // g^{mu nu}
  Mat metric_at(std::span<const double> q) const;    // g_{mu nu}
  Mat inverse_partial_at(std::span<const double> q, std::size_t lambda) const;
  // Checks symmetry, g^{00} > 0, and invertibility at a point.
  void validate_at(std::span<const double> q) const;

 private:
  std::size_t dim_ = 0;
  bool analytic_ = false;
  bool flat_ = false;
  double fd_step_ = kDefaultFdStep;
  MatrixFn inverse_;
  MatrixDerivFn d_inverse_;
};

// ---- Poisson structure -------------------------------------------------

// Canonical bracket on T*Q: sum over lambda of
// (df/dp_lambda)(dg/dq^lambda) - (df/dq^lambda)(dg/dp_lambda).
double poisson_bracket(const Observable& f, const Observable& g, const PhasePoint& z);

// Vertical bracket on V*Q; the time coordinate has no conjugate momentum.
double poisson_bracket_vertical(const VerticalObservable& f, const VerticalObservable& g,
                                const VerticalPhasePoint& s);

// Exact bracket of two polynomial-backed observables, as an observable.
Observable poisson_bracket_poly(const Observable& f, const Observable& g);

// Product f*g; exact for polynomial backings, product rule otherwise.
Observable observable_product(const Observable& f, const Observable& g);

// Closed-form bracket on the affine class. Requires analytic coefficient
// partials; the result is again affine.
Observable affine_bracket(const Observable& f, const Observable& g);

struct PhaseTangent {
  Vec dq;
  Vec dp;
};

// u_f with the convention u_f | Omega = -df: dq^lambda = df/dp_lambda,
// dp_lambda = -df/dq^lambda.
PhaseTangent hamiltonian_vector_field(const Observable& f, const PhasePoint& z);

// |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| at z. Exact inner brackets for
// polynomial observables, finite-difference composition otherwise.
double jacobi_residual(const Observable& f, const Observable& g, const Observable& h,
                       const PhasePoint& z);

// Pull-back along the fibration T*Q -> V*Q; the result ignores p_0 and
// preserves brackets of vertical observables.
Observable pullback_to_homogeneous(const VerticalObservable& f);

}  // namespace gqm

#endif  // GQMECH_PHASE_HPP
