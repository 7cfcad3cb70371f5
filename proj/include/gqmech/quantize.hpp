#ifndef GQMECH_QUANTIZE_HPP
#define GQMECH_QUANTIZE_HPP

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gqmech/grid.hpp"
#include "gqmech/phase.hpp"

namespace gqm {

struct OperatorDescriptor {
  enum class Kind { Affine, Quadratic, Prequantum, PrequantumVertical, Custom };
  Kind kind = Kind::Custom;
  std::string label;
  bool half_density_correction = true;
  bool chart_local = false;  // quadratic representative need not be global
};

// Linear map on complex grids with a record of how it was built.
class QuantumOperator {
 public:
  using ApplyFn = std::function<ComplexGrid(const ComplexGrid&)>;

  QuantumOperator() = default;
  QuantumOperator(OperatorDescriptor desc, ApplyFn apply)
      : desc_(std::move(desc)), apply_(std::move(apply)) {}

  ComplexGrid operator()(const ComplexGrid& g) const { return apply_(g); }
  const OperatorDescriptor& descriptor() const { return desc_; }
  bool valid() const { return static_cast<bool>(apply_); }

 private:
  OperatorDescriptor desc_;
  ApplyFn apply_;
};

struct SchrodingerOptions {
  // The half-density correction -(i/2) d_u a^u makes the operator
  // symmetric; turning it off exists for negative-control tests.
  bool half_density_correction = true;
};

// Quantized affine observable f = a^u(q) p_u + b(q) acting on half-density
// grids over configuration space:
//   f rho = (-i a^u d_u - (i/2)(d_u a^u) + b) rho.
// Vertical observables are covered by passing an affine form with a^0 = 0.
// Throws QuadraticRequired for non-affine input.
QuantumOperator schrodinger_operator(const Observable& f, SchrodingerOptions opts = {});

// Symmetric-matrix coefficient field for quadratic Hamiltonians.
struct MatrixField {
  std::vector<std::vector<ScalarField>> a;  // a[u][v], symmetric
  std::size_t dim() const { return a.size(); }
  static MatrixField constant(const Mat& m);
  static MatrixField diagonal(std::vector<ScalarField> diag);
  void check_symmetric_at(std::span<const double> q) const;
};

// Quantization of a^{uv}(q) p_u p_v + b^u(q) p_u + c(q):
//   rho -> -d_u(a^{uv} d_v rho) + (affine part of b, c applied to rho).
// The second-order part is discretized in divergence (flux) form, which
// keeps the discrete operator symmetric for real symmetric a.
QuantumOperator quadratic_operator(const MatrixField& a, std::vector<ScalarField> bvec,
                                   ScalarField c);

// Prequantum operator on phase-section grids with axes
// (q^0..q^{n-1}, p_0..p_{n-1}):  f s = [-i u_f + (f - p_u df/dp_u)] s.
QuantumOperator prequantum_operator(const Observable& f);

// Prequantum operator of the vertical Poisson structure on grids with axes
// (t, q^1..q^m, p_1..p_m); time derivatives never enter.
QuantumOperator prequantum_operator_vertical(const VerticalObservable& f);

// Hermitian pairing <r1|r2> = (1/2pi)^m sum r1 conj(r2) cell_volume, where
// m counts spatial axes (every axis not labeled "t" or "q0").
std::complex<double> inner_product(const ComplexGrid& r1, const ComplexGrid& r2);
double grid_norm(const ComplexGrid& g);
void normalize(ComplexGrid& g);

// l2 norm restricted to nodes at least `margin` from Dirichlet edges.
double interior_norm(const ComplexGrid& g, std::size_t margin);

// Dirac-condition defect of the Schroedinger representation:
//   max over probes of |([f^, g^] + i hat{f,g}) rho| / |rho|,
// interior nodes only. Both observables must be affine.
double commutator_residual(const Observable& f, const Observable& g,
                           std::span<const ComplexGrid> probes, std::size_t margin = 2);

// Same defect for the prequantum representation on phase-section grids.
double prequantum_commutator_residual(const Observable& f, const Observable& g,
                                      std::span<const ComplexGrid> probes,
                                      std::size_t margin = 2);

// max |<op r1|r2> - <r1|op r2>| / (|r1| |r2|) over probe pairs.
double hermiticity_residual(const QuantumOperator& op,
                            std::span<const ComplexGrid> probes);

// Half-density pushforward under a chart transition: the result on the
// target grid is rho'(q~) = |det J(q)|^(-1/2) rho(q(q~)), with the inverse
// point found by Newton iteration and rho sampled by cubic interpolation.
ComplexGrid half_density_transform(const ComplexGrid& rho, const Chart& chart,
                                   std::vector<Axis> target_axes);

// Gaussian probe exp(-sum (x-c)^2/(4 sigma^2) + i k.x).
ComplexGrid gaussian_packet(std::vector<Axis> axes, Boundary boundary, const Vec& center,
                            const Vec& sigma, const Vec& wavevec, double amplitude = 1.0);

}  // namespace gqm

#endif  // GQMECH_QUANTIZE_HPP
