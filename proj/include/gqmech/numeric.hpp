#ifndef GQMECH_NUMERIC_HPP
#define GQMECH_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gqmech/errors.hpp"

namespace gqm {

using Vec = std::vector<double>;

// Small dense row-major matrix. Phase-space dimensions stay tiny (<= 8),
// so everything here is plain O(n^3) with partial pivoting.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  const std::vector<double>& data() const { return a_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws MetricInversionFailure on a (near-)singular pivot.
Vec solve_dense(Mat a, Vec b);

// Inverse of a small square matrix.
Mat invert_dense(const Mat& a);

double determinant(Mat a);

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm_inf(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

inline double norm2(std::span<const double> x) {
  return std::sqrt(dot(x, x));
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// Least-squares slope of y against x (used for convergence-order fits and
// phase extraction). Returns the slope of the best-fit line.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

// Unwraps a sequence of angles so consecutive samples differ by < pi.
Vec unwrap_phase(std::span<const double> theta);

}  // namespace gqm

#endif  // GQMECH_NUMERIC_HPP
