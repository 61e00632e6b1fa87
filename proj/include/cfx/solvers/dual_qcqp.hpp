#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"

namespace cfx {

struct DualQcqpResult {
  ProgramSolution solution;
  double lambda = 0.0;  // multiplier for the objective ||x' - x||^2
  bool hard_case = false;
};

// min ||x' - x||^2  s.t.  1/2 x'^T A x' + b^T x' + r <= 0, A symmetric and
// possibly indefinite. Strong duality holds for a single quadratic constraint;
// the dual maximizer is the root of a secular equation in the eigenbasis of A.
inline DualQcqpResult solve_single_qcqp_dual(const Vec& x, const QuadIneq& row) {
  const std::size_t n = x.size();
  DualQcqpResult res;
  ProgramSolution& out = res.solution;

  Mat a = row.a.empty() ? Mat(n, n) : row.a;
  if (a.rows() != n || row.q.size() != n)
    throw DimensionMismatch("solve_single_qcqp_dual: shapes");

  auto g_val = [&](const Vec& z) { return row.c + dot(row.q, z) + 0.5 * dot(z, a.mul(z)); };
  auto finish = [&](const Vec& z, double mu) {
    out.status = SolveStatus::Optimal;
    out.point = z;
    Vec dvec = sub(z, x);
    out.objective = dot(dvec, dvec);
    res.lambda = 2.0 * mu;
    out.multipliers = {res.lambda};
    Vec grad = scaled(dvec, 2.0);
    axpy(grad, res.lambda, add(a.mul(z), row.q));
    out.stationarity = norm_inf(grad);
    out.max_violation = g_val(z);
    out.complementarity = std::abs(res.lambda * g_val(z));
    out.gap = out.complementarity;
  };

  // interior shortcut
  if (g_val(x) <= 0.0) {
    finish(x, 0.0);
    return res;
  }

  SymEigen es = sym_eigen(a);
  const Vec& d = es.values;  // ascending
  Vec xt(n), bt(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sx = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += es.vectors(i, j) * x[i];
      sb += es.vectors(i, j) * row.q[i];
    }
    xt[j] = sx;
    bt[j] = sb;
  }

  auto y_of = [&](double mu, Vec& y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = (xt[i] - mu * bt[i]) / (1.0 + mu * d[i]);
  };
  auto phi = [&](double mu) {
    double v = row.c;
    for (std::size_t i = 0; i < n; ++i) {
      double yi = (xt[i] - mu * bt[i]) / (1.0 + mu * d[i]);
      v += 0.5 * d[i] * yi * yi + bt[i] * yi;
    }
    return v;
  };
  auto back = [&](const Vec& y) {
    Vec z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) z[i] += es.vectors(i, j) * y[j];
    return z;
  };

  const double dmin = d.empty() ? 0.0 : d.front();

  // constraint minimum for PSD A decides feasibility outright
  if (dmin >= -1e-14) {
    double inf_g = row.c;
    bool unbounded_below = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] > 1e-14 * std::max(1.0, std::abs(d.back())))
        inf_g -= 0.5 * bt[i] * bt[i] / d[i];
      else if (std::abs(bt[i]) > 1e-12)
        unbounded_below = true;
    }
    if (!unbounded_below && inf_g > 0.0) {
      out.status = SolveStatus::Infeasible;
      out.max_violation = inf_g;
      return res;
    }
  }

  double lo = 0.0, hi;
  bool hard = false;
  if (dmin < -1e-14) {
    double mu_max = 1.0 / (-dmin);
    hi = mu_max * (1.0 - 1e-10);
    if (phi(hi) > 0.0) hard = true;
  } else {
    hi = 1.0;
    int guard = 0;
    while (phi(hi) > 0.0 && guard++ < 400) hi *= 2.0;
    if (phi(hi) > 0.0) {
      out.status = SolveStatus::Infeasible;
      out.max_violation = phi(hi);
      return res;
    }
  }

  if (!hard) {
    for (int it = 0; it < 240 && (hi - lo) > 1e-16 * (1.0 + hi); ++it) {
      double mid = 0.5 * (lo + hi);
      (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    double mu = 0.5 * (lo + hi);
    Vec y(n);
    y_of(mu, y);
    finish(back(y), mu);
    return res;
  }

  // hard case: the multiplier saturates at 1/|d_min| and the solution gains a
  // component along the bottom eigenspace sized to land on the boundary
  res.hard_case = true;
  double mu = 1.0 / (-dmin);
  Vec y(n, 0.0);
  std::size_t pivot = n;  // first bottom-eigenspace coordinate
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0 + mu * d[i];
    if (std::abs(denom) <= 1e-8) {
      if (pivot == n) pivot = i;
      y[i] = 0.0;
    } else {
      y[i] = (xt[i] - mu * bt[i]) / denom;
    }
  }
  double av = 0.5 * d[pivot];
  double bv = d[pivot] * y[pivot] + bt[pivot];  // y[pivot] is 0 here
  double cv = row.c;
  for (std::size_t i = 0; i < n; ++i) cv += 0.5 * d[i] * y[i] * y[i] + bt[i] * y[i];
  double disc = bv * bv - 4.0 * av * cv;
  disc = std::max(disc, 0.0);
  double sq = std::sqrt(disc);
  double nu1 = (-bv + sq) / (2.0 * av);
  double nu2 = (-bv - sq) / (2.0 * av);

  auto candidate = [&](double nu) {
    Vec yy = y;
    yy[pivot] += nu;
    return back(yy);
  };
  Vec za = candidate(nu1), zb = candidate(nu2);
  auto obj = [&](const Vec& z) {
    Vec dv = sub(z, x);
    return dot(dv, dv);
  };
  double oa = obj(za), ob = obj(zb);
  Vec best;
  if (std::abs(oa - ob) > 1e-12 * (1.0 + std::abs(oa))) {
    best = oa < ob ? za : zb;
  } else {
    best = std::lexicographical_compare(za.begin(), za.end(), zb.begin(), zb.end())
               ? za
               : zb;
  }
  finish(best, mu);
  return res;
}

}  // namespace cfx
