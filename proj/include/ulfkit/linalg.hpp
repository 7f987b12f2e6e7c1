#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "ulfkit/errors.hpp"

namespace ulfkit {

// Dense row-major matrix. Only what the solvers and spectral matrices need.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<T>& data() const { return data_; }

  // Max absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) s += std::abs((*this)(r, c));
      best = std::max(best, s);
    }
    return best;
  }

  std::vector<T> operator*(const std::vector<T>& x) const {
    if (x.size() != cols_) throw InvalidArgument("Matrix * vector: dimension mismatch");
    std::vector<T> y(rows_, T{});
    for (std::size_t r = 0; r < rows_; ++r) {
      T s{};
      for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * x[c];
      y[r] = s;
    }
    return y;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

// Gaussian elimination with partial (row) pivoting on a copy of A. Solves
// A X = B for every column of B. A pivot below 1e-14 * ||A||_inf raises
// SingularMatrix; `pivot_column` (when non-null) receives the failing column.
template <typename T>
Matrix<T> gauss_solve_multi(Matrix<T> a, Matrix<T> b, std::size_t* pivot_column = nullptr) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("gauss_solve: matrix must be square");
  if (b.rows() != n) throw InvalidArgument("gauss_solve: right-hand side dimension mismatch");
  const std::size_t m = b.cols();
  const double tol = 1e-14 * a.norm_inf();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(a(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > tol) || best == 0.0) {
      if (pivot_column) *pivot_column = k;
      throw SingularMatrix("gauss_solve: singular matrix (pivot " + std::to_string(k) + ")");
    }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      for (std::size_t c = 0; c < m; ++c) std::swap(b(k, c), b(piv, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const T f = a(r, k) / a(k, k);
      if (f == T{}) continue;
      a(r, k) = T{};
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
      for (std::size_t c = 0; c < m; ++c) b(r, c) -= f * b(k, c);
    }
  }
  Matrix<T> x(n, m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = n; i-- > 0;) {
      T s = b(i, c);
      for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x(j, c);
      x(i, c) = s / a(i, i);
    }
  }
  return x;
}

template <typename T>
std::vector<T> gauss_solve(const Matrix<T>& a, const std::vector<T>& b) {
  if (a.rows() != b.size()) throw InvalidArgument("gauss_solve: dimension mismatch");
  Matrix<T> rhs(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  const auto x = gauss_solve_multi(a, std::move(rhs));
  std::vector<T> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = x(i, 0);
  return out;
}

}  // namespace ulfkit
