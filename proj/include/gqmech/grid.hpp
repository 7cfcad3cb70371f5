#ifndef GQMECH_GRID_HPP
#define GQMECH_GRID_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gqmech/numeric.hpp"

namespace gqm {

enum class Boundary { Periodic, DirichletZero };

struct Axis {
  std::string label;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 0;
};

// Uniform complex grid over a coordinate box. Used both for half-densities
// over configuration space and for prequantum sections over (q, p) boxes.
//
// Node layout per axis:
//   Periodic:      x_i = lo + i h,       h = (hi - lo) / n   (hi excluded)
//   DirichletZero: x_i = lo + (i + 1) h, h = (hi - lo) / (n + 1)
//     (interior nodes only; the box edges hold implicit zeros)
// Values are row-major with the first axis slowest.
class ComplexGrid {
 public:
  using Complex = std::complex<double>;

  ComplexGrid() = default;
  ComplexGrid(std::vector<Axis> axes, Boundary boundary);

  std::size_t dim() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_[i]; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return values_.size(); }

  double spacing(std::size_t ax) const;
  double coord(std::size_t ax, std::size_t i) const;
  double cell_volume() const;
  std::size_t stride(std::size_t ax) const { return strides_[ax]; }

  Complex& operator[](std::size_t flat) { return values_[flat]; }
  const Complex& operator[](std::size_t flat) const { return values_[flat]; }
  std::vector<Complex>& values() { return values_; }
  const std::vector<Complex>& values() const { return values_; }

  std::size_t flatten(std::span<const std::size_t> idx) const;
  void unflatten(std::size_t flat, std::span<std::size_t> idx) const;
  void coords_of(std::span<const std::size_t> idx, std::span<double> x) const;

  // Neighbor value offset steps along one axis, honoring the boundary tag
  // (wrap for periodic, zero beyond the box for Dirichlet).
  Complex shifted(std::span<const std::size_t> idx, std::size_t flat, std::size_t ax,
                  int offset) const;

  bool same_layout(const ComplexGrid& other) const;
  ComplexGrid like() const;  // same layout, zero values

  // True when the multi-index keeps at least `margin` nodes from every
  // Dirichlet edge (periodic axes impose nothing).
  bool interior(std::span<const std::size_t> idx, std::size_t margin) const;

 private:
  std::vector<Axis> axes_;
  Boundary boundary_ = Boundary::Periodic;
  std::vector<std::size_t> strides_;
  std::vector<Complex> values_;
};

ComplexGrid make_grid(std::vector<Axis> axes, Boundary boundary,
                      const std::function<ComplexGrid::Complex(std::span<const double>)>& fn);

// Central difference along one axis.
ComplexGrid central_difference(const ComplexGrid& g, std::size_t ax);

// Standard second difference along one axis (3-point stencil).
ComplexGrid second_difference(const ComplexGrid& g, std::size_t ax);

// Sum of second differences over all axes.
ComplexGrid laplacian(const ComplexGrid& g);

// ---- serialization -------------------------------------------------------

// Binary layout (little endian): magic "GQG1", u32 version, u32 dim,
// u32 boundary, per axis {u32 n, u32 label_len, label bytes, f64 lo, f64 hi},
// then size() interleaved (re, im) f64 pairs, row-major.
void save_grid_binary(const ComplexGrid& g, const std::string& path);
ComplexGrid load_grid_binary(const std::string& path);

std::string grid_to_json_string(const ComplexGrid& g, int indent = -1);
ComplexGrid grid_from_json_string(const std::string& text);

}  // namespace gqm

#endif  // GQMECH_GRID_HPP
