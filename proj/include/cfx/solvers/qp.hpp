#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"
#include "cfx/solvers/simplex.hpp"

namespace cfx {

// min 1/2 x^T Q x + q^T x + c  s.t.  g x <= h, Q positive (semi)definite.
struct QpProblem {
  Mat q_mat;
  Vec q_lin;
  double q_const = 0.0;
  Mat g;
  Vec h;
};

namespace detail {

// pseudo-solve K mu = rhs for symmetric PSD K (rank-deficient working sets)
inline Vec psd_pinv_solve(const Mat& k, const Vec& rhs) {
  SymEigen es = sym_eigen(k);
  const std::size_t n = rhs.size();
  double emax = 0.0;
  for (double e : es.values) emax = std::max(emax, std::abs(e));
  double cut = 1e-12 * std::max(1.0, emax);
  Vec y(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(es.values[j]) <= cut) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += es.vectors(i, j) * rhs[i];
    proj /= es.values[j];
    for (std::size_t i = 0; i < n; ++i) y[i] += proj * es.vectors(i, j);
  }
  return y;
}

// feasibility LP: min t  s.t.  g x - t <= h, t >= -1. A nonpositive optimum
// yields a feasible point (strictly interior when t* < 0).
inline std::optional<Vec> lp_feasible_point(const Mat& g, const Vec& h) {
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();
  LpProblem lp;
  lp.cost.assign(n + 1, 0.0);
  lp.cost[n] = 1.0;
  lp.g = Mat(m + 1, n + 1);
  lp.h.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) lp.g(i, j) = g(i, j);
    lp.g(i, n) = -1.0;
    lp.h[i] = h[i];
  }
  lp.g(m, n) = -1.0;
  lp.h[m] = 1.0;
  ProgramSolution s = solve_lp(lp);
  if (s.status != SolveStatus::Optimal) return std::nullopt;
  if (s.objective > 1e-8) return std::nullopt;
  Vec x(s.point.begin(), s.point.begin() + static_cast<long>(n));
  return x;
}

}  // namespace detail

inline ProgramSolution solve_qp(const QpProblem& qp,
                                std::optional<Vec> start = std::nullopt) {
  const std::size_t n = qp.q_lin.size();
  const std::size_t m = qp.g.rows();
  if (qp.q_mat.rows() != n || qp.q_mat.cols() != n)
    throw DimensionMismatch("solve_qp: Q shape");
  if (m > 0 && qp.g.cols() != n) throw DimensionMismatch("solve_qp: g shape");
  if (qp.h.size() != m) throw DimensionMismatch("solve_qp: h shape");

  ProgramSolution out;

  // factor Q; PSD-singular objectives get a tiny ridge (the engine only ever
  // sends definite ones)
  Mat qm = qp.q_mat;
  std::optional<Cholesky> qf;
  try {
    qf.emplace(qm);
  } catch (const NotPositiveDefinite&) {
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += qm(i, i);
    double ridge = 1e-10 * (1.0 + tr / std::max<std::size_t>(n, 1));
    for (std::size_t i = 0; i < n; ++i) qm(i, i) += ridge;
    qf.emplace(qm);
  }

  auto objective = [&](const Vec& x) {
    return 0.5 * dot(x, qp.q_mat.mul(x)) + dot(qp.q_lin, x) + qp.q_const;
  };

  Vec x;
  if (start) {
    x = *start;
    if (x.size() != n) throw DimensionMismatch("solve_qp: start size");
  } else if (m == 0) {
    x = qf->solve(scaled(qp.q_lin, -1.0));
    out.status = SolveStatus::Optimal;
    out.point = x;
    out.objective = objective(x);
    Vec grad = add(qp.q_mat.mul(x), qp.q_lin);
    out.stationarity = norm_inf(grad);
    out.iterations = 1;
    return out;
  } else {
    auto x0 = detail::lp_feasible_point(qp.g, qp.h);
    if (!x0) {
      out.status = SolveStatus::Infeasible;
      return out;
    }
    x = *x0;
  }

  Vec gx = m > 0 ? qp.g.mul(x) : Vec{};
  auto act_tol = [&](std::size_t i) {
    double s = 1.0 + std::abs(qp.h[i]);
    for (std::size_t j = 0; j < n; ++j) s = std::max(s, std::abs(qp.g(i, j)));
    return 1e-9 * s;
  };

  std::vector<std::size_t> w;  // working set
  std::vector<char> in_w(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (gx[i] >= qp.h[i] - act_tol(i)) {
      w.push_back(i);
      in_w[i] = 1;
    }

  const int cap = 200 + 20 * static_cast<int>(m + n);
  int it = 0;
  Vec mu;  // multipliers of the working set
  for (; it < cap; ++it) {
    // equality step on the working set via the Schur complement
    Vec grad = add(qp.q_mat.mul(x), qp.q_lin);
    Vec qig = qf->solve(grad);
    Vec p;
    mu.assign(w.size(), 0.0);
    if (w.empty()) {
      p = scaled(qig, -1.0);
    } else {
      Mat k(w.size(), w.size());
      Vec rhs(w.size());
      std::vector<Vec> qiat(w.size());
      for (std::size_t a = 0; a < w.size(); ++a) {
        Vec ga(n);
        for (std::size_t j = 0; j < n; ++j) ga[j] = qp.g(w[a], j);
        qiat[a] = qf->solve(ga);
        rhs[a] = -dot(ga, qig);
      }
      for (std::size_t a = 0; a < w.size(); ++a)
        for (std::size_t b = 0; b < w.size(); ++b) {
          Vec gb(n);
          for (std::size_t j = 0; j < n; ++j) gb[j] = qp.g(w[b], j);
          k(a, b) = dot(gb, qiat[a]);
        }
      mu = detail::psd_pinv_solve(k.symmetrized(), rhs);
      Vec t = grad;
      for (std::size_t a = 0; a < w.size(); ++a)
        for (std::size_t j = 0; j < n; ++j) t[j] += mu[a] * qp.g(w[a], j);
      p = scaled(qf->solve(t), -1.0);
    }

    if (norm_inf(p) <= 1e-10 * (1.0 + norm_inf(x))) {
      // stationary on W; optimal if no multiplier wants out
      double worst = 0.0;
      std::size_t drop = w.size();
      for (std::size_t a = 0; a < w.size(); ++a)
        if (mu[a] < worst) {
          worst = mu[a];
          drop = a;
        }
      if (drop == w.size() || worst >= -1e-9) break;
      in_w[w[drop]] = 0;
      w.erase(w.begin() + static_cast<long>(drop));
      continue;
    }

    // longest step keeping feasibility
    double alpha = 1.0;
    std::size_t block = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (in_w[i]) continue;
      double gp = 0.0;
      for (std::size_t j = 0; j < n; ++j) gp += qp.g(i, j) * p[j];
      if (gp <= 1e-12) continue;
      double room = qp.h[i] - gx[i];
      double a = room / gp;
      if (a < alpha) {
        alpha = std::max(a, 0.0);
        block = i;
      }
    }
    axpy(x, alpha, p);
    gx = qp.g.mul(x);
    if (block < m) {
      w.push_back(block);
      in_w[block] = 1;
    }
  }

  out.iterations = it;
  if (it >= cap) {
    out.status = SolveStatus::MaxIterations;
    out.point = x;
    out.objective = objective(x);
    return out;
  }

  out.status = SolveStatus::Optimal;
  out.point = x;
  out.objective = objective(x);
  out.multipliers.assign(m, 0.0);
  for (std::size_t a = 0; a < w.size(); ++a)
    out.multipliers[w[a]] = std::max(mu[a], 0.0);

  Vec grad = add(qp.q_mat.mul(x), qp.q_lin);
  double comp = 0.0, viol = 0.0;
  if (m > 0) {
    gx = qp.g.mul(x);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) grad[j] += out.multipliers[i] * qp.g(i, j);
      comp = std::max(comp, std::abs(out.multipliers[i] * (gx[i] - qp.h[i])));
      viol = std::max(viol, gx[i] - qp.h[i]);
    }
  }
  out.stationarity = norm_inf(grad);
  out.complementarity = comp;
  out.max_violation = viol;

  // with stationarity ~ 0 the Lagrangian dual value at (x, lambda) differs
  // from the primal by exactly -lambda^T (g x - h)
  double gap = 0.0;
  for (std::size_t i = 0; i < m; ++i) gap += out.multipliers[i] * (qp.h[i] - gx[i]);
  out.gap = std::abs(gap);
  return out;
}

}  // namespace cfx
