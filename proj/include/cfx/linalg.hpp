#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cfx/errors.hpp"

namespace cfx {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm2_sq(const Vec& v) { return dot(v, v); }
inline double norm2(const Vec& v) { return std::sqrt(norm2_sq(v)); }

inline Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("add: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionMismatch("sub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(const Vec& a, double c) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

// y += c * x
inline void axpy(Vec& y, double c, const Vec& x) {
  if (y.size() != x.size()) throw DimensionMismatch("axpy: size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Dense row-major matrix. The checked constructor rejects NaN/Inf entries;
// the (rows, cols) form zero-initializes.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Mat(std::size_t rows, std::size_t cols, Vec entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("Mat: entry count does not match shape");
    if (!all_finite(data_)) throw ValidationError("Mat: non-finite entry");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const Vec& data() const { return data_; }

  Vec mul(const Vec& x) const {
    if (x.size() != cols_) throw DimensionMismatch("Mat::mul: vector size");
    Vec y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  Mat mul(const Mat& b) const {
    if (cols_ != b.rows_) throw DimensionMismatch("Mat::mul: shape mismatch");
    Mat c(rows_, b.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a * b(k, j);
      }
    return c;
  }

  Mat transposed() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  double max_asymmetry() const {
    if (rows_ != cols_) throw DimensionMismatch("max_asymmetry: not square");
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  Mat symmetrized() const {
    if (rows_ != cols_) throw DimensionMismatch("symmetrized: not square");
    Mat s(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec data_;
};

inline constexpr double kSymmetryTol = 1e-10;

// Cholesky factor of a symmetric positive definite matrix. Inputs are
// symmetrized as (M + M^T)/2 after an asymmetry check at 1e-10 absolute.
class Cholesky {
 public:
  explicit Cholesky(const Mat& m) : l_(m.rows(), m.cols()) {
    if (m.rows() != m.cols()) throw DimensionMismatch("cholesky: not square");
    if (m.max_asymmetry() > kSymmetryTol)
      throw NotSymmetric("cholesky: matrix is not symmetric within 1e-10");
    Mat a = m.symmetrized();
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (d <= 0.0)
        throw NotPositiveDefinite("cholesky: non-positive pivot");
      l_(j, j) = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / l_(j, j);
      }
    }
  }

  std::size_t dim() const { return l_.rows(); }

  Vec solve(const Vec& rhs) const {
    const std::size_t n = dim();
    if (rhs.size() != n) throw DimensionMismatch("cholesky solve: rhs size");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
      y[i] = s / l_(i, i);
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
      x[ii] = s / l_(ii, ii);
    }
    return x;
  }

  double log_det() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) s += std::log(l_(i, i));
    return 2.0 * s;
  }

  Mat inverse() const {
    const std::size_t n = dim();
    Mat inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = 1.0;
      Vec col = solve(e);
      e[j] = 0.0;
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    // exact symmetry keeps downstream difference tests clean
    return inv.symmetrized();
  }

 private:
  Mat l_;
};

inline Vec solve_spd(const Mat& m, const Vec& rhs) { return Cholesky(m).solve(rhs); }
inline Mat inverse_spd(const Mat& m) { return Cholesky(m).inverse(); }

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns, orthonormal, vectors.col(i) <-> values[i]
};

// Cyclic Jacobi for symmetric matrices. Quadratic convergence makes the sweep
// cap generous at desk scale.
inline SymEigen sym_eigen(const Mat& m, int max_sweeps = 64) {
  if (m.rows() != m.cols()) throw DimensionMismatch("sym_eigen: not square");
  if (m.max_asymmetry() > kSymmetryTol)
    throw NotSymmetric("sym_eigen: matrix is not symmetric within 1e-10");
  Mat a = m.symmetrized();
  const std::size_t n = a.rows();
  Mat v = Mat::identity(n);
  if (n <= 1) {
    SymEigen r;
    r.values = n == 1 ? Vec{a(0, 0)} : Vec{};
    r.vectors = v;
    return r;
  }
  const double scale = 1.0 + a.max_abs();
  const double stop = 1e-14 * scale;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= stop * 1e-2) continue;
        double app = a(p, p), aqq = a(q, q);
        double theta = 0.5 * (aqq - app) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off > stop) throw NoConvergence("sym_eigen: Jacobi sweeps exhausted");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen r;
  r.values.resize(n);
  r.vectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, j) = v(i, order[j]);
  }
  return r;
}

// General square solve via LU with partial pivoting (dual recovery in the
// simplex, nothing performance-critical).
inline Vec lu_solve(Mat a, Vec b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw DimensionMismatch("lu_solve: shape");
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) < 1e-300) throw SingularMatrix("lu_solve: singular");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(p, j), a(k, j));
      std::swap(b[p], b[k]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

}  // namespace cfx
