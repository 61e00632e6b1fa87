#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"

namespace cfx {

// min cost^T z  s.t.  g z <= h  over free z.
struct LpProblem {
  Vec cost;
  Mat g;
  Vec h;
};

namespace detail {

inline constexpr double kLpEps = 1e-9;
inline constexpr std::size_t kNoCol = std::numeric_limits<std::size_t>::max();

struct Tableau {
  Mat t;                           // m x (ncols+1), rhs in last column
  Vec obj;                         // ncols+1, obj[ncols] == -objective
  std::vector<std::size_t> basis;  // column basic in each row
  std::vector<bool> allowed;       // columns eligible to enter
  std::size_t ncols = 0;
  long pivots = 0;

  void reduce_obj() {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      double f = obj[basis[i]];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) obj[j] -= f * t(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t col) {
    double p = t(r, col);
    for (std::size_t j = 0; j <= ncols; ++j) t(r, j) /= p;
    t(r, col) = 1.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (i == r) continue;
      double f = t(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) t(i, j) -= f * t(r, j);
      t(i, col) = 0.0;
    }
    double f = obj[col];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= ncols; ++j) obj[j] -= f * t(r, j);
      obj[col] = 0.0;
    }
    basis[r] = col;
    ++pivots;
  }

  // Bland's rule; returns Optimal, Unbounded or MaxIterations.
  SolveStatus iterate(long cap) {
    const std::size_t m = basis.size();
    while (pivots < cap) {
      std::size_t enter = kNoCol;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (!allowed[j]) continue;
        if (obj[j] < -kLpEps) {
          enter = j;
          break;
        }
      }
      if (enter == kNoCol) return SolveStatus::Optimal;
      std::size_t leave = kNoCol;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double a = t(i, enter);
        if (a <= kLpEps) continue;
        double ratio = t(i, ncols) / a;
        if (leave == kNoCol || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis[i] < basis[leave]))
          leave = i, best_ratio = ratio;
      }
      if (leave == kNoCol) return SolveStatus::Unbounded;
      pivot(leave, enter);
    }
    return SolveStatus::MaxIterations;
  }
};

}  // namespace detail

inline ProgramSolution solve_lp(const LpProblem& lp) {
  using namespace detail;
  const std::size_t n = lp.cost.size();
  const std::size_t m = lp.g.rows();
  if (m > 0 && lp.g.cols() != n) throw DimensionMismatch("solve_lp: g/cost shape");
  if (lp.h.size() != m) throw DimensionMismatch("solve_lp: g/h shape");

  // row scaling keeps pivots sane when constraint rows differ wildly in
  // magnitude (MAD weights can reach 1e9)
  Vec row_scale(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = std::abs(lp.h[i]);
    for (std::size_t j = 0; j < n; ++j) s = std::max(s, std::abs(lp.g(i, j)));
    row_scale[i] = s > 0.0 ? s : 1.0;
  }

  // standard form columns: u (n), v (n), slack (m), artificials
  const std::size_t n_struct = 2 * n + m;
  Vec flip(m, 1.0);
  std::vector<std::size_t> art_rows;
  for (std::size_t i = 0; i < m; ++i)
    if (lp.h[i] / row_scale[i] < 0.0) {
      flip[i] = -1.0;
      art_rows.push_back(i);
    }
  const std::size_t n_art = art_rows.size();
  const std::size_t ncols = n_struct + n_art;

  Mat a0(m, ncols);  // untouched copy for dual recovery
  Tableau tab;
  tab.ncols = ncols;
  tab.t = Mat(m, ncols + 1);
  tab.basis.assign(m, 0);
  tab.allowed.assign(ncols, true);
  for (std::size_t i = 0; i < m; ++i) {
    double f = flip[i] / row_scale[i];
    for (std::size_t j = 0; j < n; ++j) {
      a0(i, j) = f * lp.g(i, j);
      a0(i, n + j) = -f * lp.g(i, j);
    }
    a0(i, 2 * n + i) = flip[i];
    tab.t(i, ncols) = f * lp.h[i];
    tab.basis[i] = 2 * n + i;
  }
  for (std::size_t k = 0; k < n_art; ++k) {
    a0(art_rows[k], n_struct + k) = 1.0;
    tab.basis[art_rows[k]] = n_struct + k;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < ncols; ++j) tab.t(i, j) = a0(i, j);

  const long cap = 10000 + 200 * static_cast<long>(m + n);
  ProgramSolution out;

  // phase 1: drive artificials to zero
  if (n_art > 0) {
    tab.obj.assign(ncols + 1, 0.0);
    for (std::size_t k = 0; k < n_art; ++k) tab.obj[n_struct + k] = 1.0;
    tab.reduce_obj();
    SolveStatus st = tab.iterate(cap);
    if (st == SolveStatus::MaxIterations) {
      out.status = st;
      out.iterations = static_cast<int>(tab.pivots);
      return out;
    }
    double infeas = -tab.obj[ncols];
    if (infeas > 1e-7) {
      out.status = SolveStatus::Infeasible;
      out.iterations = static_cast<int>(tab.pivots);
      out.max_violation = infeas;
      return out;
    }
    // pivot basic artificials out when possible; a row where we cannot is
    // redundant and keeps its artificial parked at zero
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < n_struct) continue;
      for (std::size_t j = 0; j < n_struct; ++j) {
        if (std::abs(tab.t(i, j)) > 1e-7) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t k = 0; k < n_art; ++k) tab.allowed[n_struct + k] = false;
  }

  // phase 2
  tab.obj.assign(ncols + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    tab.obj[j] = lp.cost[j];
    tab.obj[n + j] = -lp.cost[j];
  }
  tab.reduce_obj();
  SolveStatus st = tab.iterate(cap);
  out.iterations = static_cast<int>(tab.pivots);
  if (st != SolveStatus::Optimal) {
    out.status = st;
    return out;
  }

  Vec z(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) z[tab.basis[i]] = tab.t(i, ncols);
  Vec x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = z[j] - z[n + j];

  out.status = SolveStatus::Optimal;
  out.point = x;
  out.objective = dot(lp.cost, x);

  // duals from the optimal basis: y solves B^T y = c_B on the standard form,
  // then lambda_i = -flip_i y_i rescaled back to original rows
  if (m > 0) {
    Mat bt(m, m);
    Vec cb(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t col = tab.basis[k];
      for (std::size_t i = 0; i < m; ++i) bt(k, i) = a0(i, col);
      if (col < n)
        cb[k] = lp.cost[col];
      else if (col < 2 * n)
        cb[k] = -lp.cost[col - n];
    }
    Vec y = lu_solve(bt, cb);
    Vec lambda(m);
    for (std::size_t i = 0; i < m; ++i) lambda[i] = -flip[i] * y[i] / row_scale[i];
    out.multipliers = lambda;

    Vec grad = lp.cost;  // cost + g^T lambda
    Vec gx = lp.g.mul(x);
    double comp = 0.0, viol = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) grad[j] += lambda[i] * lp.g(i, j);
      comp = std::max(comp, std::abs(lambda[i] * (gx[i] - lp.h[i])));
      viol = std::max(viol, gx[i] - lp.h[i]);
    }
    out.stationarity = norm_inf(grad);
    out.complementarity = comp;
    out.max_violation = viol;
    out.gap = std::abs(out.objective + dot(lp.h, lambda));
  }
  return out;
}

}  // namespace cfx
