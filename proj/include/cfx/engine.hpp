#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cfx/errors.hpp"
#include "cfx/model.hpp"
#include "cfx/program.hpp"
#include "cfx/report.hpp"
#include "cfx/solvers/ccp.hpp"
#include "cfx/solvers/dual_qcqp.hpp"
#include "cfx/solvers/qp.hpp"
#include "cfx/solvers/simplex.hpp"
#include "cfx/tree_explain.hpp"

namespace cfx {

namespace detail {

inline void check_label(const Model& m, double target) {
  std::vector<double> labels = class_labels(m);
  if (std::find(labels.begin(), labels.end(), target) == labels.end())
    throw InvalidTarget("build_constraints: target is not a model label");
}

// Quadratic rows whose matrix part vanished entirely are plain linear rows;
// emit them as such so the cheaper solvers apply.
inline QuadIneq make_row(Mat a, Vec q, double c, Mat conv, Mat conc,
                         bool strict) {
  QuadIneq r;
  if (!a.empty() && a.max_abs() == 0.0) a = Mat();
  r.q = std::move(q);
  r.c = c;
  r.strict = strict;
  if (!a.empty()) {
    r.a = std::move(a);
    r.a_convex = std::move(conv);
    r.a_concave = std::move(conc);
  }
  return r;
}

inline QuadIneq linear_row(Vec q, double c, bool strict) {
  return make_row(Mat(), std::move(q), c, Mat(), Mat(), strict);
}

// covariance inverse and log-determinant, from the cache when prepared
inline void qda_inverse(const QdaModel& m, std::size_t i, Mat& inv,
                        double& logdet) {
  if (m.prepared()) {
    inv = m.cov_inv[i];
    logdet = m.cov_logdet[i];
    return;
  }
  Cholesky ch(m.cov[i].symmetrized());
  inv = ch.inverse();
  logdet = ch.log_det();
}

}  // namespace detail

// Constraint system over x' whose satisfaction makes the model output the
// target. Strict rows (classification boundaries) keep strict=true; callers
// relax them by folding a margin into c before solving. For GLM regressors
// the accepted deviation tol is already folded in. LVQ, trees and ensembles
// have dedicated routines.
inline ConstraintSet build_constraints(const Model& m, double target,
                                       double tol = 0.0) {
  if (!std::isfinite(target))
    throw InvalidTarget("build_constraints: target must be finite");
  ConstraintSet cs;
  cs.dim = m.dimension;
  switch (m.family) {
    case Family::Hyperplane: {
      detail::check_label(m, target);
      const auto& h = m.as<HyperplaneModel>();
      // sign(w^T x' + b) = y'  <=>  -y' (w^T x' + b) < 0
      cs.rows.push_back(
          detail::linear_row(scaled(h.w, -target), -h.b * target, true));
      break;
    }
    case Family::Softmax: {
      detail::check_label(m, target);
      const auto& s = m.as<SoftmaxModel>();
      std::size_t i = static_cast<std::size_t>(target);
      for (std::size_t j = 0; j < s.classes(); ++j) {
        if (j == i) continue;
        // class i must outscore class j: (w_j - w_i)^T x' + b_j - b_i < 0
        cs.rows.push_back(
            detail::linear_row(sub(s.w[j], s.w[i]), s.b[j] - s.b[i], true));
      }
      break;
    }
    case Family::Linear:
    case Family::Poisson:
    case Family::Exponential: {
      const auto& g = m.as<GlmModel>();
      double c0;
      if (g.kind == GlmKind::Linear) {
        c0 = g.b - target;
      } else if (g.kind == GlmKind::Poisson) {
        if (target <= 0.0)
          throw InvalidTarget("build_constraints: poisson target must be > 0");
        c0 = g.b - std::log(target);
      } else {
        if (target == 0.0)
          throw InvalidTarget(
              "build_constraints: exponential target must be nonzero");
        c0 = g.b + 1.0 / target;
      }
      // |w^T x' + c0| <= tol, two non-strict rows
      cs.rows.push_back(detail::linear_row(g.w, c0 - tol, false));
      cs.rows.push_back(detail::linear_row(scaled(g.w, -1.0), -c0 - tol, false));
      break;
    }
    case Family::Gnb: {
      detail::check_label(m, target);
      const auto& g = m.as<GnbModel>();
      std::size_t i = static_cast<std::size_t>(target);
      std::size_t d = m.dimension;
      for (std::size_t j = 0; j < g.classes(); ++j) {
        if (j == i) continue;
        // log-density gap of class j over class i as a quadratic row in the
        // canonical 1/2 x'^T A x' form; A is diagonal, so the convex/concave
        // split is the per-class pair of precision diagonals
        Vec ad(d), qv(d), conv(d), conc(d);
        double c = std::log(g.prior[j] / g.prior[i]);
        for (std::size_t k = 0; k < d; ++k) {
          double vi = g.var[i][k], vj = g.var[j][k];
          ad[k] = 1.0 / vi - 1.0 / vj;
          conv[k] = 1.0 / vi;
          conc[k] = 1.0 / vj;
          qv[k] = g.mean[j][k] / vj - g.mean[i][k] / vi;
          c += 0.5 * std::log(vi / vj) -
               g.mean[j][k] * g.mean[j][k] / (2.0 * vj) +
               g.mean[i][k] * g.mean[i][k] / (2.0 * vi);
        }
        cs.rows.push_back(detail::make_row(Mat::diag(ad), std::move(qv), c,
                                           Mat::diag(conv), Mat::diag(conc),
                                           true));
      }
      break;
    }
    case Family::Qda: {
      detail::check_label(m, target);
      const auto& qm = m.as<QdaModel>();
      std::size_t i = static_cast<std::size_t>(target);
      Mat inv_i;
      double logdet_i;
      detail::qda_inverse(qm, i, inv_i, logdet_i);
      Vec si = inv_i.mul(qm.mean[i]);
      for (std::size_t j = 0; j < qm.classes(); ++j) {
        if (j == i) continue;
        Mat inv_j;
        double logdet_j;
        detail::qda_inverse(qm, j, inv_j, logdet_j);
        Vec sj = inv_j.mul(qm.mean[j]);
        Mat a = inv_i;
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t cc = 0; cc < a.cols(); ++cc) a(r, cc) -= inv_j(r, cc);
        Vec qv = sub(sj, si);
        double c = 0.5 * (dot(qm.mean[i], si) - dot(qm.mean[j], sj)) +
                   0.5 * (logdet_i - logdet_j) +
                   std::log(qm.prior[j] / qm.prior[i]);
        cs.rows.push_back(detail::make_row(std::move(a), std::move(qv), c,
                                           inv_i, inv_j, true));
      }
      break;
    }
    default:
      throw UnsupportedFamily(
          "build_constraints: family has a dedicated counterfactual routine");
  }
  return cs;
}

// Relax every strict row f(x') < 0 to f(x') <= -margin.
inline ConstraintSet fold_margin(ConstraintSet cs, double margin) {
  for (auto& r : cs.rows)
    if (r.strict) {
      r.c += margin;
      r.strict = false;
    }
  return cs;
}

namespace detail {

struct SystemOutcome {
  ProgramSolution sol;  // sol.point is the d-dimensional x'
  std::string method;
};

// Dispatch a margin-folded system: linear rows go to the LP (manhattan) or
// QP (euclidean) path, systems with quadratic rows to the penalty CCP, and
// the single-quadratic-constraint euclidean case to the exact dual solver.
inline SystemOutcome solve_system(const ConstraintSet& cs,
                                  const Regularizer& reg, const Vec& x,
                                  const Vec& witness) {
  const std::size_t d = x.size();
  SystemOutcome out;
  if (!cs.any_quadratic()) {
    if (reg.kind == RegKind::manhattan) {
      EpigraphLpPieces ep = manhattan_epigraph(reg, x);
      LpProblem lp;
      lp.cost = ep.cost;
      std::size_t base = ep.g.rows();
      lp.g = Mat(base + cs.rows.size(), 2 * d);
      lp.h.assign(base + cs.rows.size(), 0.0);
      for (std::size_t r = 0; r < base; ++r) {
        for (std::size_t ccol = 0; ccol < 2 * d; ++ccol)
          lp.g(r, ccol) = ep.g(r, ccol);
        lp.h[r] = ep.h[r];
      }
      for (std::size_t r = 0; r < cs.rows.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j)
          lp.g(base + r, j) = cs.rows[r].q[j];
        lp.h[base + r] = -cs.rows[r].c;
      }
      out.sol = solve_lp(lp);
      out.method = "lp";
    } else {
      QuadraticPieces pieces = euclidean_pieces(x);
      QpProblem qp;
      qp.q_mat = pieces.solver_q();
      qp.q_lin = pieces.solver_lin();
      qp.q_const = pieces.q_const;
      qp.g = Mat(cs.rows.size(), d);
      qp.h.assign(cs.rows.size(), 0.0);
      for (std::size_t r = 0; r < cs.rows.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) qp.g(r, j) = cs.rows[r].q[j];
        qp.h[r] = -cs.rows[r].c;
      }
      out.sol = solve_qp(qp);
      out.method = "qp";
    }
    if (out.sol.point.size() > d)
      out.sol.point.resize(d);
    return out;
  }

  if (cs.rows.size() == 1 && reg.kind == RegKind::euclidean) {
    DualQcqpResult dual = solve_single_qcqp_dual(x, cs.rows[0]);
    out.sol = dual.solution;
    out.method = "dual-qcqp";
    return out;
  }

  CcpResult ccp = penalty_ccp(cs.rows, reg, x, witness.empty() ? x : witness);
  out.sol = ccp.solution;
  out.method = "ccp";
  return out;
}

inline bool report_valid(const Model& m, double target, double tol,
                         const Vec& xp) {
  if (is_regressor(m) && m.family != Family::Ensemble) {
    // regression validity is checked where the constraints live: in the
    // linear link, |w^T x' + c0| <= tol
    const auto& g = m.as<GlmModel>();
    double z = dot(g.w, xp) + g.b;
    double c0 = g.kind == GlmKind::Linear ? -target
                : g.kind == GlmKind::Poisson ? -std::log(target)
                                             : 1.0 / target;
    return std::abs(z + c0) <= tol + 1e-9;
  }
  return predict(m, xp) == target;
}

inline CounterfactualReport finish_report(const Model& m,
                                          const CounterfactualQuery& q,
                                          SystemOutcome&& outcome) {
  CounterfactualReport r;
  r.method = std::move(outcome.method);
  r.diagnostics = std::move(outcome.sol);
  if (r.diagnostics.status == SolveStatus::Optimal &&
      report_valid(m, q.target, q.tol, r.diagnostics.point)) {
    r.found = true;
    r.point = r.diagnostics.point;
    r.deltas = sub(r.point, q.x);
    r.reg_value = eval_regularizer(q.reg, q.x, r.point);
    try {
      r.achieved = predict(m, r.point);
    } catch (const EvaluationError&) {
      r.found = false;
      r.failure = "Infeasible";
    }
  } else {
    r.failure = r.diagnostics.status == SolveStatus::Infeasible
                    ? "Infeasible"
                    : "NotFound";
  }
  return r;
}

}  // namespace detail

namespace detail {

// Rows of the subproblem anchored at prototype i: x' must end up closer to
// p_i than to every differently-labeled prototype. Shared metrics give
// linear rows, per-prototype metrics quadratic rows split as
// (Omega_i, Omega_j).
inline ConstraintSet lvq_rows(const LvqModel& l, std::size_t i,
                              const std::vector<std::size_t>& wrong,
                              std::size_t d) {
  Mat omega_shared;
  if (l.metric == LvqMetric::Global) omega_shared = l.omega;
  else if (l.metric == LvqMetric::Identity) omega_shared = Mat::identity(d);

  ConstraintSet cs;
  cs.dim = d;
  for (std::size_t j : wrong) {
    if (l.metric == LvqMetric::PerPrototype) {
      const Mat& oi = l.omegas[i];
      const Mat& oj = l.omegas[j];
      Mat a = oi;
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) a(r, c) -= oj(r, c);
      Vec qv = sub(oj.mul(l.prototypes[j]), oi.mul(l.prototypes[i]));
      double c = 0.5 * (dot(l.prototypes[i], oi.mul(l.prototypes[i])) -
                        dot(l.prototypes[j], oj.mul(l.prototypes[j])));
      cs.rows.push_back(make_row(std::move(a), std::move(qv), c, oi, oj,
                                 true));
    } else {
      Vec qv = omega_shared.mul(sub(l.prototypes[j], l.prototypes[i]));
      double c =
          0.5 * (dot(l.prototypes[i], omega_shared.mul(l.prototypes[i])) -
                 dot(l.prototypes[j], omega_shared.mul(l.prototypes[j])));
      cs.rows.push_back(linear_row(std::move(qv), c, true));
    }
  }
  return cs;
}

inline void lvq_partition(const LvqModel& l, double target,
                          std::vector<std::size_t>& own,
                          std::vector<std::size_t>& wrong) {
  for (std::size_t i = 0; i < l.prototypes.size(); ++i)
    (static_cast<double>(l.labels[i]) == target ? own : wrong).push_back(i);
}

}  // namespace detail

// One subproblem per prototype carrying the target label; the cheapest
// subproblem wins and ties within 1e-9 go to the lowest prototype index.
inline CounterfactualReport lvq_counterfactual(const Model& m,
                                               const CounterfactualQuery& q) {
  const auto& l = m.as<LvqModel>();
  std::vector<std::size_t> own, wrong;
  detail::lvq_partition(l, q.target, own, wrong);
  if (own.empty())
    throw NoPrototypeForTarget("lvq_counterfactual: no prototype has the target label");

  const std::size_t d = m.dimension;
  CounterfactualReport best;
  bool have = false;
  for (std::size_t i : own) {
    detail::SystemOutcome outcome = detail::solve_system(
        fold_margin(detail::lvq_rows(l, i, wrong, d), q.margin), q.reg, q.x,
        l.prototypes[i]);
    if (outcome.sol.status != SolveStatus::Optimal) continue;
    if (predict(m, outcome.sol.point) != q.target) continue;
    double value = eval_regularizer(q.reg, q.x, outcome.sol.point);
    if (!have || value < best.reg_value - 1e-9) {
      best.found = true;
      best.point = outcome.sol.point;
      best.deltas = sub(best.point, q.x);
      best.reg_value = value;
      best.achieved = q.target;
      best.method = outcome.method;
      best.diagnostics = std::move(outcome.sol);
      have = true;
    }
  }
  if (!have) {
    best.found = false;
    best.failure = "Infeasible";
    best.diagnostics.status = SolveStatus::Infeasible;
    best.method = "lvq";
  }
  return best;
}

// Single source of truth for what attaining the target means, shared with
// the model-agnostic search: constraint families must satisfy the same
// margin-folded system the dedicated paths solve (otherwise a search could
// "win" by the width of the margin), LVQ any one target-prototype subproblem,
// trees and ensembles the prediction itself within the accepted band.
inline std::function<bool(const Vec&)> target_validator(
    const Model& m, const CounterfactualQuery& q) {
  switch (m.family) {
    case Family::Tree: {
      Model mm = m;
      double target = q.target, tol = q.tol;
      return [mm, target, tol](const Vec& z) {
        double p = predict(mm, z);
        return tol > 0.0 ? std::abs(p - target) <= tol : p == target;
      };
    }
    case Family::Ensemble: {
      EnsembleModel e = m.as<EnsembleModel>();
      CounterfactualQuery qq = q;
      return [e, qq](const Vec& z) { return detail::ensemble_valid(e, z, qq); };
    }
    case Family::Lvq: {
      const auto& l = m.as<LvqModel>();
      std::vector<std::size_t> own, wrong;
      detail::lvq_partition(l, q.target, own, wrong);
      std::vector<ConstraintSet> systems;
      for (std::size_t i : own)
        systems.push_back(
            fold_margin(detail::lvq_rows(l, i, wrong, m.dimension), q.margin));
      return [systems](const Vec& z) {
        for (const auto& cs : systems)
          if (cs.max_violation(z) <= 0.0) return true;
        return false;
      };
    }
    default: {
      ConstraintSet folded =
          fold_margin(build_constraints(m, q.target, q.tol), q.margin);
      return [folded](const Vec& z) { return folded.max_violation(z) <= 0.0; };
    }
  }
}

// Build the constraint system for the requested prediction, pick the solver
// the system's shape calls for, and assemble the validated report.
inline CounterfactualReport compute_counterfactual(
    const Model& m, const CounterfactualQuery& q) {
  if (q.x.size() != m.dimension)
    throw DimensionMismatch("compute_counterfactual: input dimension");
  if (!(q.margin > 0.0))
    throw ValidationError("compute_counterfactual: margin must be > 0");
  if (q.tol < 0.0)
    throw ValidationError("compute_counterfactual: tol must be >= 0");

  switch (m.family) {
    case Family::Tree:
      return tree_counterfactual(m.as<TreeModel>(), q);
    case Family::Ensemble: {
      // no label pre-check: a target no leaf combination can reach is a
      // heuristic NotFound, not an input error
      CounterfactualReport a = ensemble_counterfactual_a(m.as<EnsembleModel>(), q);
      CounterfactualReport b = ensemble_counterfactual_b(m.as<EnsembleModel>(), q);
      if (a.found && (!b.found || a.reg_value < b.reg_value - 1e-9)) return a;
      if (b.found) return b;
      return a;
    }
    case Family::Lvq:
      return lvq_counterfactual(m, q);
    default: {
      ConstraintSet cs = fold_margin(build_constraints(m, q.target, q.tol),
                                     q.margin);
      Vec witness;
      if (m.family == Family::Gnb)
        witness = m.as<GnbModel>().mean[static_cast<std::size_t>(q.target)];
      else if (m.family == Family::Qda)
        witness = m.as<QdaModel>().mean[static_cast<std::size_t>(q.target)];
      return detail::finish_report(
          m, q, detail::solve_system(cs, q.reg, q.x, witness));
    }
  }
}

}  // namespace cfx
