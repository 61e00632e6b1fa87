#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cfx/errors.hpp"
#include "cfx/linalg.hpp"

namespace cfx {

enum class RegKind { manhattan, euclidean };

// Closeness measure between the query point and its counterfactual:
// weighted Manhattan  sum_j w_j |x_j - x'_j|  or squared Euclidean
// ||x' - x||^2. Weights apply to the Manhattan kind only; empty means uniform.
struct Regularizer {
  RegKind kind = RegKind::manhattan;
  Vec weights;

  static Regularizer manhattan(Vec w = {}) { return {RegKind::manhattan, std::move(w)}; }
  static Regularizer euclidean() { return {RegKind::euclidean, {}}; }

  Vec weights_for(std::size_t dim) const {
    if (weights.empty()) return Vec(dim, 1.0);
    if (weights.size() != dim)
      throw DimensionMismatch("regularizer: weight count does not match dimension");
    return weights;
  }
};

inline double median_inplace(Vec& v) {
  if (v.empty()) throw EmptyDataset("median of empty column");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline constexpr double kMadFloor = 1e-9;

// Per-feature weights from the median absolute deviation of a dataset,
// w_j = 1 / max(MAD_j, 1e-9); constant columns therefore get a very large
// weight and are effectively frozen.
inline Vec mad_weights(const std::vector<Vec>& columns) {
  if (columns.empty()) throw EmptyDataset("mad_weights: no columns");
  Vec w(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    Vec col = columns[j];
    if (col.empty()) throw EmptyDataset("mad_weights: empty column");
    double med = median_inplace(col);
    for (double& v : col) v = std::abs(v - med);
    double mad = median_inplace(col);
    // clamped columns get exactly 1/kMadFloor, not its rounded reciprocal
    w[j] = mad <= kMadFloor ? 1e9 : 1.0 / mad;
  }
  return w;
}

inline double eval_regularizer(const Regularizer& reg, const Vec& x, const Vec& xp) {
  if (x.size() != xp.size())
    throw DimensionMismatch("eval_regularizer: point sizes differ");
  if (reg.kind == RegKind::euclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      double d = xp[j] - x[j];
      s += d * d;
    }
    return s;
  }
  Vec w = reg.weights_for(x.size());
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * std::abs(xp[j] - x[j]);
  return s;
}

// Manhattan epigraph pieces over stacked variables z = (x', beta), both of
// length d: minimize sum_j beta_j subject to
//   w_j x'_j - beta_j <= w_j x_j,   -w_j x'_j - beta_j <= -w_j x_j,   -beta_j <= 0.
struct EpigraphLpPieces {
  std::size_t dim = 0;  // d; z has 2d entries
  Vec cost;             // length 2d
  Mat g;                // 3d x 2d
  Vec h;                // length 3d
};

inline EpigraphLpPieces manhattan_epigraph(const Regularizer& reg, const Vec& x) {
  std::size_t d = x.size();
  Vec w = reg.weights_for(d);
  EpigraphLpPieces p;
  p.dim = d;
  p.cost.assign(2 * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) p.cost[d + j] = 1.0;
  p.g = Mat(3 * d, 2 * d);
  p.h.assign(3 * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    p.g(3 * j + 0, j) = w[j];
    p.g(3 * j + 0, d + j) = -1.0;
    p.h[3 * j + 0] = w[j] * x[j];
    p.g(3 * j + 1, j) = -w[j];
    p.g(3 * j + 1, d + j) = -1.0;
    p.h[3 * j + 1] = -w[j] * x[j];
    p.g(3 * j + 2, d + j) = -1.0;
    p.h[3 * j + 2] = 0.0;
  }
  return p;
}

// Euclidean pieces: minimizing 1/2 x'^T Q x' + q^T x' with Q = I and
// q = -x has the same argmin as ||x' - x||^2; the dropped constant x^T x is
// kept so reported objective values can be reconstructed.
struct QuadraticPieces {
  Mat q_mat;             // I
  Vec q_lin;             // -x
  double q_const = 0.0;  // x^T x (dropped from the solver objective)

  // ||z - x||^2 == z^T Q z + 2 q^T z + const
  double value(const Vec& z) const {
    return dot(z, q_mat.mul(z)) + 2.0 * dot(q_lin, z) + q_const;
  }

  // pieces scaled for a solver working in 1/2 z^T Q z + q^T z + c form so the
  // solver's objective equals ||z - x||^2 directly
  Mat solver_q() const {
    Mat q = q_mat;
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = 0; j < q.cols(); ++j) q(i, j) *= 2.0;
    return q;
  }
  Vec solver_lin() const { return scaled(q_lin, 2.0); }
};

inline QuadraticPieces euclidean_pieces(const Vec& x) {
  QuadraticPieces p;
  p.q_mat = Mat::identity(x.size());
  p.q_lin = scaled(x, -1.0);
  p.q_const = dot(x, x);
  return p;
}

}  // namespace cfx
