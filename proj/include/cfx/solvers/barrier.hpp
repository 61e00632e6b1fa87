#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"

namespace cfx {

// min 1/2 x^T Q x + q^T x + c  s.t. convex quadratic rows f_i(x) <= 0
// (each row's A is PSD or absent). Solved on the central path with a log
// barrier; phase 1 minimizes the worst violation when no strict start is given.
struct QcqpProblem {
  Mat q_mat;  // may be all-zero (linear objective)
  Vec q_lin;
  double q_const = 0.0;
  std::vector<QuadIneq> rows;
};

struct BarrierParams {
  double t0 = 1.0;
  double mu = 20.0;
  double gap_tol = 1e-8;        // stop when m/t falls below this
  double newton_tol = 1e-11;    // on the squared Newton decrement / 2
  int max_outer = 64;
  int max_newton_total = 20000;
};

namespace detail {

struct BarrierExit {
  // when set, inner iterations stop as soon as predicate(z) is true
  std::function<bool(const Vec&)> predicate;
};

inline ProgramSolution barrier_minimize(const QcqpProblem& pr, Vec z,
                                        const BarrierParams& prm,
                                        const BarrierExit& exit_hook) {
  const std::size_t n = pr.q_lin.size();
  const std::size_t m = pr.rows.size();
  ProgramSolution out;

  auto f0 = [&](const Vec& x) {
    double v = pr.q_const + dot(pr.q_lin, x);
    if (!pr.q_mat.empty()) v += 0.5 * dot(x, pr.q_mat.mul(x));
    return v;
  };
  auto phi = [&](const Vec& x, double t, bool& ok) {
    ok = true;
    double v = t * f0(x);
    for (const auto& r : pr.rows) {
      double fi = r.value(x);
      if (fi >= 0.0) {
        ok = false;
        return 0.0;
      }
      v -= std::log(-fi);
    }
    return v;
  };

  {
    bool ok = true;
    phi(z, 1.0, ok);
    if (!ok) throw ValidationError("barrier: start point is not strictly feasible");
  }

  double t = prm.t0;
  int newton_total = 0;
  bool early = false;
  for (int outer = 0; outer < prm.max_outer && !early; ++outer) {
    for (int inner = 0; inner < 400; ++inner) {
      if (++newton_total > prm.max_newton_total) {
        out.status = SolveStatus::MaxIterations;
        out.point = z;
        out.objective = f0(z);
        out.iterations = newton_total;
        return out;
      }
      if (exit_hook.predicate && exit_hook.predicate(z)) {
        early = true;
        break;
      }

      Vec grad = scaled(pr.q_lin, t);
      if (!pr.q_mat.empty()) axpy(grad, t, pr.q_mat.mul(z));
      Mat hess(n, n);
      if (!pr.q_mat.empty())
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) hess(i, j) = t * pr.q_mat(i, j);
      for (const auto& r : pr.rows) {
        double fi = r.value(z);
        Vec gi = r.gradient(z);
        double inv = 1.0 / (-fi);
        axpy(grad, inv, gi);
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) {
            double hab = gi[a] * gi[b] * inv * inv;
            if (!r.a.empty()) hab += r.a(a, b) * inv;
            hess(a, b) += hab;
          }
      }

      Vec step;
      double ridge = 0.0;
      for (int attempt = 0;; ++attempt) {
        try {
          Mat hr = hess;
          if (ridge > 0.0)
            for (std::size_t i = 0; i < n; ++i) hr(i, i) += ridge;
          step = scaled(Cholesky(hr.symmetrized()).solve(grad), -1.0);
          break;
        } catch (const NotPositiveDefinite&) {
          if (attempt >= 8) throw;
          ridge = ridge == 0.0 ? 1e-12 * (1.0 + hess.max_abs()) : ridge * 100.0;
        }
      }

      double decrement_sq = -dot(grad, step);
      if (decrement_sq * 0.5 <= prm.newton_tol) break;

      bool ok = true;
      double base = phi(z, t, ok);
      double alpha = 1.0;
      Vec cand(n);
      for (int ls = 0; ls < 80; ++ls) {
        for (std::size_t j = 0; j < n; ++j) cand[j] = z[j] + alpha * step[j];
        bool okc = true;
        double v = phi(cand, t, okc);
        if (okc && v <= base + 0.25 * alpha * dot(grad, step)) break;
        alpha *= 0.5;
        if (alpha < 1e-16) {
          alpha = 0.0;
          break;
        }
      }
      if (alpha == 0.0) break;
      for (std::size_t j = 0; j < n; ++j) z[j] += alpha * step[j];
    }
    if (static_cast<double>(m) / t <= prm.gap_tol) break;
    t *= prm.mu;
  }

  out.status = SolveStatus::Optimal;
  out.point = z;
  out.objective = f0(z);
  out.iterations = newton_total;
  out.gap = static_cast<double>(m) / t;
  out.multipliers.assign(m, 0.0);
  Vec grad = pr.q_lin;
  if (!pr.q_mat.empty()) axpy(grad, 1.0, pr.q_mat.mul(z));
  double viol = m > 0 ? -std::numeric_limits<double>::infinity() : 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double fi = pr.rows[i].value(z);
    double lam = 1.0 / (-t * fi);
    out.multipliers[i] = lam;
    axpy(grad, lam, pr.rows[i].gradient(z));
    viol = std::max(viol, fi);
    comp = std::max(comp, std::abs(lam * fi));
  }
  out.stationarity = norm_inf(grad);
  out.max_violation = viol;
  out.complementarity = comp;
  return out;
}

}  // namespace detail

inline ProgramSolution solve_convex_qcqp(
    const QcqpProblem& pr, std::optional<Vec> strict_start = std::nullopt,
    const BarrierParams& prm = {}) {
  const std::size_t n = pr.q_lin.size();

  if (pr.rows.empty()) {
    // unconstrained quadratic
    ProgramSolution out;
    if (pr.q_mat.empty()) {
      out.status = norm_inf(pr.q_lin) == 0.0 ? SolveStatus::Optimal
                                             : SolveStatus::Unbounded;
      out.point = Vec(n, 0.0);
      out.objective = pr.q_const;
      return out;
    }
    try {
      Vec x = Cholesky(pr.q_mat).solve(scaled(pr.q_lin, -1.0));
      out.status = SolveStatus::Optimal;
      out.point = x;
      out.objective = 0.5 * dot(x, pr.q_mat.mul(x)) + dot(pr.q_lin, x) + pr.q_const;
      out.stationarity = norm_inf(add(pr.q_mat.mul(x), pr.q_lin));
      out.iterations = 1;
      return out;
    } catch (const NotPositiveDefinite&) {
      out.status = SolveStatus::Unbounded;
      out.point = Vec(n, 0.0);
      return out;
    }
  }

  Vec z0;
  if (strict_start) {
    z0 = *strict_start;
    if (z0.size() != n) throw DimensionMismatch("solve_convex_qcqp: start size");
  } else {
    // phase 1 over (x, s): min s  s.t. f_i(x) - s <= 0
    QcqpProblem ph;
    ph.q_lin.assign(n + 1, 0.0);
    ph.q_lin[n] = 1.0;
    for (const auto& r : pr.rows) {
      QuadIneq e;
      if (!r.a.empty()) {
        e.a = Mat(n + 1, n + 1);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) e.a(i, j) = r.a(i, j);
      }
      e.q.assign(n + 1, 0.0);
      for (std::size_t j = 0; j < n; ++j) e.q[j] = r.q[j];
      e.q[n] = -1.0;
      e.c = r.c;
      ph.rows.push_back(std::move(e));
    }
    Vec zs(n + 1, 0.0);
    double worst = 0.0;
    for (const auto& r : pr.rows) worst = std::max(worst, r.value(Vec(n, 0.0)));
    zs[n] = worst + 1.0;
    detail::BarrierExit hook;
    hook.predicate = [n](const Vec& z) { return z[n] <= -1e-7; };
    BarrierParams p1 = prm;
    ProgramSolution ph_sol = detail::barrier_minimize(ph, zs, p1, hook);
    if (ph_sol.point.empty() || ph_sol.point[n] >= -1e-9) {
      ProgramSolution out;
      out.status = SolveStatus::Infeasible;
      out.iterations = ph_sol.iterations;
      out.max_violation = ph_sol.point.empty() ? 0.0 : ph_sol.point[n];
      return out;
    }
    z0.assign(ph_sol.point.begin(), ph_sol.point.begin() + static_cast<long>(n));
  }

  return detail::barrier_minimize(pr, std::move(z0), prm, {});
}

}  // namespace cfx
