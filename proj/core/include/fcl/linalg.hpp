#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "fcl/jet.hpp"

namespace fcl {

/// Dense row-major matrix over double or Jet2. Dimensions here are tiny
/// (n <= 6), so no attempt is made at blocking or expression templates.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, const T& fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

  static Matrix square(int n, const T& fill = T{}) { return Matrix(n, n, fill); }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const T& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }

  const std::vector<T>& data() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

inline Matrix<double> identity(int n) {
  Matrix<double> m = Matrix<double>::square(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

template <class T>
Matrix<double> values(const Matrix<T>& m) {
  Matrix<double> r(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = value_of(m(i, j));
  return r;
}

template <class T>
std::vector<double> values(const std::vector<T>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = value_of(v[i]);
  return r;
}

/// Index (0-based) of the first leading principal minor that fails to be
/// positive, found by attempting a Cholesky factorization; nullopt when
/// the symmetric matrix is positive definite.
inline std::optional<int> first_nonpositive_minor(const Matrix<double>& a) {
  const int n = a.rows();
  Matrix<double> l = Matrix<double>::square(n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return j;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return std::nullopt;
}

/// Gauss-Jordan inverse without pivoting; valid for the positive definite
/// matrices this library inverts. Works on jets, propagating derivatives.
template <class T>
Matrix<T> invert_spd(const Matrix<T>& a) {
  const int n = a.rows();
  Matrix<T> work(a);
  Matrix<T> inv = Matrix<T>::square(n, T(0.0));
  for (int i = 0; i < n; ++i) inv(i, i) = T(1.0);
  for (int p = 0; p < n; ++p) {
    const T pivot = work(p, p);
    for (int j = 0; j < n; ++j) {
      work(p, j) = work(p, j) / pivot;
      inv(p, j) = inv(p, j) / pivot;
    }
    for (int i = 0; i < n; ++i) {
      if (i == p) continue;
      const T factor = work(i, p);
      for (int j = 0; j < n; ++j) {
        work(i, j) = work(i, j) - factor * work(p, j);
        inv(i, j) = inv(i, j) - factor * inv(p, j);
      }
    }
  }
  return inv;
}

inline double frobenius(const Matrix<double>& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    r = std::fmax(r, std::fabs(a.data()[i] - b.data()[i]));
  return r;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::fmax(r, std::fabs(a[i] - b[i]));
  return r;
}

inline double max_abs(const std::vector<double>& a) {
  double r = 0.0;
  for (double v : a) r = std::fmax(r, std::fabs(v));
  return r;
}

}  // namespace fcl
