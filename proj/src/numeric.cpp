#include "gqmech/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace gqm {

Vec solve_dense(Mat a, Vec b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw DimensionMismatch("solve_dense: shape mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::abs(a(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300)
      throw MetricInversionFailure("solve_dense: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t j = ri + 1; j < n; ++j) s -= a(ri, j) * x[j];
    x[ri] = s / a(ri, ri);
  }
  return x;
}

Mat invert_dense(const Mat& a) {
  const std::size_t n = a.rows();
  Mat inv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    Vec e(n, 0.0);
    e[col] = 1.0;
    Vec x = solve_dense(a, std::move(e));
    for (std::size_t r = 0; r < n; ++r) inv(r, col) = x[r];
  }
  return inv;
}

double determinant(Mat a) {
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::abs(a(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return det;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DimensionMismatch("least_squares_slope: need >= 2 matching samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error("least_squares_slope: degenerate abscissae");
  return sxy / sxx;
}

Vec unwrap_phase(std::span<const double> theta) {
  Vec out(theta.begin(), theta.end());
  const double pi = 3.14159265358979323846;
  double shift = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = theta[i] - theta[i - 1];
    if (d > pi)
      shift -= 2.0 * pi;
    else if (d < -pi)
      shift += 2.0 * pi;
    out[i] = theta[i] + shift;
  }
  return out;
}

}  // namespace gqm
