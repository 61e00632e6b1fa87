#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "cfx/linalg.hpp"

// Brute-force minimum of `objective` over the feasible grid points of
// [lo,hi]^2 with step h. Templated so hot loops stay inlined.
template <class Feas, class Obj>
double grid_min_2d(double lo, double hi, double h, Feas&& feasible, Obj&& objective) {
  double best = std::numeric_limits<double>::infinity();
  const long steps = std::lround((hi - lo) / h);
  for (long i = 0; i <= steps; ++i) {
    const double u = lo + h * static_cast<double>(i);
    for (long j = 0; j <= steps; ++j) {
      const double v = lo + h * static_cast<double>(j);
      if (!feasible(u, v)) continue;
      const double o = objective(u, v);
      if (o < best) best = o;
    }
  }
  return best;
}

template <class Feas, class Obj>
double grid_min_1d(double lo, double hi, double h, Feas&& feasible, Obj&& objective) {
  double best = std::numeric_limits<double>::infinity();
  const long steps = std::lround((hi - lo) / h);
  for (long i = 0; i <= steps; ++i) {
    const double u = lo + h * static_cast<double>(i);
    if (!feasible(u)) continue;
    const double o = objective(u);
    if (o < best) best = o;
  }
  return best;
}

inline std::mt19937_64 seeded_rng(unsigned long long seed) {
  return std::mt19937_64(seed);
}

inline cfx::Vec random_vec(std::mt19937_64& rng, std::size_t n, double lo = -2.0,
                           double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  cfx::Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// random symmetric matrix with entries in [-1, 1]
inline cfx::Mat random_symmetric(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cfx::Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = u(rng);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

// random SPD matrix built as L L^T + eps I
inline cfx::Mat random_spd(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cfx::Mat l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) l(i, j) = u(rng);
    l(i, i) = 0.5 + std::abs(u(rng));
  }
  cfx::Mat m = l.mul(l.transposed());
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 1e-3;
  return m;
}
