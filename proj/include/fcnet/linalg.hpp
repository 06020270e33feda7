#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fcnet/errors.hpp"

namespace fcnet {

/// Dense row-major matrix, just big enough for the traffic systems solved
/// here (a few dozen unknowns).
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

/// Solves A x = b by Gaussian elimination with partial pivoting. A is taken
/// by value and destroyed.
inline std::vector<double> lu_solve(Mat A, std::vector<double> b) {
  const std::size_t n = A.rows;
  if (A.cols != n || b.size() != n) throw validation_error("lu_solve: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(A(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(A(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) throw infeasible_error("lu_solve: singular system");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A(r, col) / A(col, col);
      if (f == 0.0) continue;
      A(r, col) = 0.0;
      for (std::size_t j = col + 1; j < n; ++j) A(r, j) -= f * A(col, j);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x;
}

/// Largest |eigenvalue| estimate by power iteration; used as a divergence
/// guard for the traffic fixed point.
inline double spectral_radius_estimate(const Mat& A, int iters = 200) {
  const std::size_t n = A.rows;
  std::vector<double> v(n, 1.0 / static_cast<double>(n ? n : 1)), w(n, 0.0);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += std::abs(A(i, j)) * v[j];
      w[i] = s;
    }
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, x);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

}  // namespace fcnet
