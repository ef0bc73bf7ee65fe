#pragma once

// Small dense linear algebra: row-major matrices, LU with partial pivoting,
// solves, inverses, and a 1-norm condition number. Every system in this
// library is tiny (constraint tables, buffer coefficient systems, a 40x40
// radial basis matrix), so a direct factorization is the right tool.

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace hcpinn::la {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// LU factorization with partial pivoting, PA = LU packed in place.
class Lu {
 public:
  explicit Lu(Matrix a) : lu_(std::move(a)), piv_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (n == 0 || lu_.cols() != n) throw SolverError("LU needs a square matrix");
    for (std::size_t i = 0; i < n; ++i) piv_[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        const double m = std::abs(lu_(i, k));
        if (m > best) {
          best = m;
          p = i;
        }
      }
      if (best == 0.0) throw SolverError("singular matrix in LU factorization");
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(piv_[k], piv_[p]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        lu_(i, k) /= lu_(k, k);
        const double f = lu_(i, k);
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  std::size_t dim() const { return lu_.rows(); }

  // Solves A x = b. Generic over the scalar type of b so reverse-mode values
  // can flow through a solve against a constant matrix.
  template <class S>
  std::vector<S> solve(const std::vector<S>& b) const {
    const std::size_t n = dim();
    std::vector<S> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[piv_[i]];
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] = x[i] - S(lu_(i, j)) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] = x[i] - S(lu_(i, j)) * x[j];
      x[i] = x[i] / S(lu_(i, i));
    }
    return x;
  }

  Matrix inverse() const {
    const std::size_t n = dim();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = 1.0;
      const auto col = solve(e);
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
      e[j] = 0.0;
    }
    return inv;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> piv_;
};

inline double norm1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

// kappa_1(A) = |A|_1 |A^-1|_1. Exact (not an estimate); fine for small n.
inline double cond1(const Matrix& a) {
  Lu lu(a);
  return norm1(a) * norm1(lu.inverse());
}

inline std::vector<double> solve(const Matrix& a, const std::vector<double>& b) {
  return Lu(a).solve(b);
}

inline double residual_inf(const Matrix& a, const std::vector<double>& x,
                           const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = -b[i];
    for (std::size_t j = 0; j < a.cols(); ++j) r += a(i, j) * x[j];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace hcpinn::la
