#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"
#include "cfx/regularizer.hpp"
#include "cfx/solvers/barrier.hpp"

namespace cfx {

struct CcpParams {
  // exact-penalty scale: above the active multipliers of unit-scale problems,
  // so iterates from a feasible start have no incentive to buy slack
  double tau0 = 100.0;
  double tau_growth = 2.0;
  double tau_max = 1e6;
  int max_outer = 100;
  double move_tol = 1e-6;
  double slack_tol = 1e-6;
};

struct CcpIterate {
  int k = 0;
  Vec point;             // linearization point x_k
  std::vector<Vec> rho;  // per row: A_concave x_k (empty rows are not split)
  Vec ctilde;            // per row: -1/2 x_k^T A_concave x_k
  double tau = 0.0;
  // exact-penalty merit f0(x_{k+1}) + tau_k * sum_l max(0, f_l(x_{k+1}))
  double penalized_objective = 0.0;
};

struct CcpResult {
  ProgramSolution solution;
  std::vector<CcpIterate> trace;
};

namespace detail {

// Subproblem points come off a central path and can sit a solver-noise hair
// on the wrong side of a row; push such points back across along the row
// gradient so the exact-penalty merit is not charged tau * noise.
inline void polish_feasibility(const std::vector<QuadIneq>& rows, Vec& z) {
  for (int sweep = 0; sweep < 4; ++sweep) {
    bool moved = false;
    for (const auto& r : rows) {
      double v = r.value(z);
      if (v <= 0.0 || v > 1e-6) continue;
      Vec n = r.gradient(z);
      double nn = dot(n, n);
      if (nn <= 1e-18) continue;
      double t = (v + 1e-12) / nn;
      for (int rep = 0; rep < 3; ++rep) {
        Vec cand = z;
        axpy(cand, -t, n);
        if (r.value(cand) <= 0.0) {
          z = std::move(cand);
          moved = true;
          break;
        }
        t *= 2.0;
      }
    }
    if (!moved) break;
  }
}

}  // namespace detail

// Penalty convex-concave procedure for difference-of-convex constraint rows.
// Each quadratic row must carry a PSD split (a == a_convex - a_concave); the
// concave part is replaced by its tangent at the current iterate and the
// convexified subproblem (with slacked constraints) goes to the barrier solver.
inline CcpResult penalty_ccp(const std::vector<QuadIneq>& rows,
                             const Regularizer& reg, const Vec& x_origin,
                             Vec start, const CcpParams& prm = {}) {
  const std::size_t d = x_origin.size();
  const std::size_t m = rows.size();
  if (start.size() != d) throw DimensionMismatch("penalty_ccp: start size");
  for (const auto& r : rows)
    if (!r.is_linear() && !r.has_dc_split())
      throw ValidationError("penalty_ccp: quadratic row without a DC split");

  const bool euclid = reg.kind == RegKind::euclidean;
  const std::size_t n_beta = euclid ? 0 : d;
  const std::size_t nvar = d + n_beta + m;  // x', [beta], slacks

  auto total_violation = [&](const Vec& x) {
    double s = 0.0;
    for (const auto& r : rows) s += std::max(0.0, r.value(x));
    return s;
  };
  auto merit = [&](const Vec& x, double tau) {
    return eval_regularizer(reg, x_origin, x) + tau * total_violation(x);
  };

  EpigraphLpPieces epi;
  QuadraticPieces quad;
  if (euclid)
    quad = euclidean_pieces(x_origin);
  else
    epi = manhattan_epigraph(reg, x_origin);

  CcpResult res;
  Vec xk = std::move(start);
  double tau = prm.tau0;
  int k = 0;
  ProgramSolution last_sub;
  for (; k < prm.max_outer; ++k) {
    // convexified subproblem at xk
    QcqpProblem sp;
    sp.q_lin.assign(nvar, 0.0);
    if (euclid) {
      Mat sq = quad.solver_q();
      Vec sl = quad.solver_lin();
      sp.q_mat = Mat(nvar, nvar);
      for (std::size_t j = 0; j < d; ++j) {
        sp.q_mat(j, j) = sq(j, j);
        sp.q_lin[j] = sl[j];
      }
      sp.q_const = quad.q_const;
    } else {
      for (std::size_t j = 0; j < d; ++j) sp.q_lin[d + j] = 1.0;
    }
    for (std::size_t l = 0; l < m; ++l) sp.q_lin[d + n_beta + l] = tau;

    CcpIterate trace_entry;
    trace_entry.k = k;
    trace_entry.point = xk;
    trace_entry.tau = tau;
    trace_entry.rho.resize(m);
    trace_entry.ctilde.assign(m, 0.0);

    for (std::size_t l = 0; l < m; ++l) {
      const QuadIneq& r = rows[l];
      QuadIneq e;
      e.q.assign(nvar, 0.0);
      for (std::size_t j = 0; j < d; ++j) e.q[j] = r.q[j];
      e.q[d + n_beta + l] = -1.0;
      e.c = r.c;
      if (r.has_dc_split()) {
        Vec rho = r.a_concave.mul(xk);
        double ct = -0.5 * dot(xk, r.a_concave.mul(xk));
        trace_entry.rho[l] = rho;
        trace_entry.ctilde[l] = ct;
        for (std::size_t j = 0; j < d; ++j) e.q[j] -= rho[j];
        e.c -= ct;
        if (r.a_convex.max_abs() > 0.0) {
          e.a = Mat(nvar, nvar);
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) e.a(i, j) = r.a_convex(i, j);
        }
      } else if (!r.a.empty()) {
        // convex row passed through exactly
        e.a = Mat(nvar, nvar);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) e.a(i, j) = r.a(i, j);
      }
      sp.rows.push_back(std::move(e));
    }
    // slack positivity
    for (std::size_t l = 0; l < m; ++l) {
      QuadIneq e;
      e.q.assign(nvar, 0.0);
      e.q[d + n_beta + l] = -1.0;
      sp.rows.push_back(std::move(e));
    }
    if (!euclid) {
      for (std::size_t i = 0; i < epi.g.rows(); ++i) {
        QuadIneq e;
        e.q.assign(nvar, 0.0);
        for (std::size_t j = 0; j < 2 * d; ++j) e.q[j] = epi.g(i, j);
        e.c = -epi.h[i];
        sp.rows.push_back(std::move(e));
      }
    }

    // strict start folded around xk
    Vec z0(nvar, 0.0);
    for (std::size_t j = 0; j < d; ++j) z0[j] = xk[j];
    if (!euclid) {
      Vec w = reg.weights_for(d);
      for (std::size_t j = 0; j < d; ++j)
        z0[d + j] = w[j] * std::abs(xk[j] - x_origin[j]) + 1.0;
    }
    for (std::size_t l = 0; l < m; ++l)
      z0[d + n_beta + l] = std::max(0.0, rows[l].value(xk)) + 1.0;

    BarrierParams bp;
    bp.gap_tol = 1e-10;
    bp.newton_tol = 1e-12;
    bp.max_newton_total = 40000;
    try {
      last_sub = detail::barrier_minimize(sp, z0, bp, {});
    } catch (const Error& e) {
      throw SubproblemFailure(std::string("penalty_ccp: ") + e.what());
    }
    Vec xh(last_sub.point.begin(), last_sub.point.begin() + static_cast<long>(d));
    detail::polish_feasibility(rows, xh);

    // descent safeguard: the subproblem provably does not increase the merit
    // at fixed tau, so accept strict improvements only; ties (exact-penalty
    // plateaus) and numerical shortfalls keep the previous iterate
    double mk = merit(xk, tau);
    Vec xnext = merit(xh, tau) < mk - 1e-12 * (1.0 + std::abs(mk)) ? xh : xk;
    trace_entry.penalized_objective = merit(xnext, tau);
    res.trace.push_back(std::move(trace_entry));

    double move = norm_inf(sub(xnext, xk));
    double viol = 0.0;
    for (const auto& r : rows) viol = std::max(viol, r.value(xnext));
    xk = xnext;
    if (move < prm.move_tol && viol < prm.slack_tol) {
      ++k;
      break;
    }
    // tau moves only when a stalled iterate is still infeasible; while tau is
    // fixed the acceptance rule above keeps the recorded merit non-increasing
    if (move < prm.move_tol) {
      if (tau >= prm.tau_max) {
        ++k;
        break;
      }
      tau = std::min(tau * prm.tau_growth, prm.tau_max);
    }
  }

  ProgramSolution& sol = res.solution;
  sol.point = xk;
  sol.objective = eval_regularizer(reg, x_origin, xk);
  sol.iterations = k;
  double viol = 0.0;
  for (const auto& r : rows) viol = std::max(viol, r.value(xk));
  sol.max_violation = viol;
  sol.stationarity = last_sub.stationarity;
  sol.gap = last_sub.gap;
  sol.status = viol < prm.slack_tol ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  return res;
}

}  // namespace cfx
