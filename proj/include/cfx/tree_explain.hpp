#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cfx/errors.hpp"
#include "cfx/model.hpp"
#include "cfx/report.hpp"
#include "cfx/solvers/nelder_mead.hpp"

namespace cfx {

struct PathCondition {
  struct Cond {
    std::size_t feature = 0;
    bool greater = false;  // false: x_j <= t, true: x_j > t
    double threshold = 0.0;
  };
  std::vector<Cond> conds;
  double leaf = 0.0;
};

struct BoxChange {
  std::vector<bool> changed;  // per feature
  Vec point;                  // x'
  double reg_value = 0.0;
};

namespace detail {

// per-feature box of a path: lower bounds are exclusive ("x_j > t"), upper
// bounds inclusive ("x_j <= t"); a feature's box is feasible iff lo < hi
struct PathBox {
  Vec lo, hi;
};

inline PathBox path_box(const PathCondition& path, std::size_t dim) {
  PathBox b;
  b.lo.assign(dim, -std::numeric_limits<double>::infinity());
  b.hi.assign(dim, std::numeric_limits<double>::infinity());
  for (const auto& c : path.conds) {
    if (c.greater)
      b.lo[c.feature] = std::max(b.lo[c.feature], c.threshold);
    else
      b.hi[c.feature] = std::min(b.hi[c.feature], c.threshold);
  }
  return b;
}

inline bool box_feasible(const PathBox& b) {
  for (std::size_t j = 0; j < b.lo.size(); ++j)
    if (!(b.lo[j] < b.hi[j])) return false;
  return true;
}

inline void walk_paths(const TreeModel& t, int node, double lo, double hi,
                       std::size_t dim, PathCondition& cur,
                       std::vector<PathCondition>& out) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf) {
    if (n.value >= lo && n.value <= hi) {
      PathCondition p = cur;
      p.leaf = n.value;
      if (box_feasible(path_box(p, dim))) out.push_back(std::move(p));
    }
    return;
  }
  cur.conds.push_back({n.feature, false, n.threshold});
  walk_paths(t, n.left, lo, hi, dim, cur, out);
  cur.conds.back().greater = true;
  walk_paths(t, n.right, lo, hi, dim, cur, out);
  cur.conds.pop_back();
}

inline std::size_t tree_dim(const TreeModel& t) {
  std::size_t d = 0;
  for (const auto& n : t.nodes)
    if (!n.is_leaf) d = std::max(d, n.feature + 1);
  return d;
}

}  // namespace detail

// All root-to-leaf paths whose leaf prediction lies in [lo, hi] and whose
// conditions admit at least one point. Unreachable (self-contradictory)
// paths are skipped: no input realizes them.
inline std::vector<PathCondition> enumerate_paths(const TreeModel& t,
                                                  double lo, double hi) {
  std::vector<PathCondition> out;
  PathCondition cur;
  detail::walk_paths(t, 0, lo, hi, detail::tree_dim(t), cur, out);
  return out;
}

inline std::vector<PathCondition> enumerate_paths(const TreeModel& t,
                                                  double target) {
  return enumerate_paths(t, target, target);
}

// Minimal change moving x into the path's box. Per feature: keep x_j when it
// already lies inside; otherwise move to the nearest box edge, stepping
// delta_split past an exclusive lower bound (capped at the upper bound for
// boxes narrower than the step). Separable regularizers make this per-feature
// rule exact.
inline BoxChange path_min_change(const Vec& x, const PathCondition& path,
                                 const Regularizer& reg,
                                 double delta_split = 1e-6) {
  detail::PathBox b = detail::path_box(path, x.size());
  for (const auto& c : path.conds)
    if (c.feature >= x.size())
      throw InconsistentPath("path_min_change: feature beyond input size");
  if (!detail::box_feasible(b))
    throw InconsistentPath("path_min_change: contradictory conditions");
  BoxChange ch;
  ch.changed.assign(x.size(), false);
  ch.point = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] > b.lo[j] && x[j] <= b.hi[j]) continue;
    ch.changed[j] = true;
    if (x[j] <= b.lo[j])
      ch.point[j] = std::min(b.lo[j] + delta_split, b.hi[j]);
    else
      ch.point[j] = b.hi[j];
  }
  ch.reg_value = eval_regularizer(reg, x, ch.point);
  return ch;
}

// Exact counterfactual of a single tree: cheapest minimal change over all
// paths predicting inside [target - tol, target + tol].
inline CounterfactualReport tree_counterfactual(const TreeModel& tree,
                                                const CounterfactualQuery& q) {
  std::vector<PathCondition> paths =
      enumerate_paths(tree, q.target - q.tol, q.target + q.tol);
  if (paths.empty())
    throw NoSuchPrediction("tree_counterfactual: no leaf yields the target");
  bool have = false;
  BoxChange best;
  for (const auto& p : paths) {
    BoxChange ch = path_min_change(q.x, p, q.reg, q.delta_split);
    if (!have || ch.reg_value < best.reg_value) {
      best = std::move(ch);
      have = true;
    }
  }
  CounterfactualReport r;
  r.found = true;
  r.point = best.point;
  r.deltas = sub(best.point, q.x);
  r.reg_value = best.reg_value;
  r.achieved = predict(tree, best.point);
  r.method = "tree";
  r.diagnostics.status = SolveStatus::Optimal;
  r.diagnostics.objective = best.reg_value;
  return r;
}

namespace detail {

inline bool ensemble_valid(const EnsembleModel& e, const Vec& z,
                           const CounterfactualQuery& q) {
  double p = predict(e, z);
  if (e.aggregation == Aggregation::Mean)
    return std::abs(p - q.target) <= q.tol + 1e-9;
  return p == q.target;
}

inline bool tree_disagrees(const TreeModel& t, const Vec& z,
                           const CounterfactualQuery& q, bool mean_agg) {
  double p = predict(t, z);
  if (mean_agg) return std::abs(p - q.target) > q.tol;
  return p != q.target;
}

inline CounterfactualReport ensemble_report(const EnsembleModel& e,
                                            const CounterfactualQuery& q,
                                            const Vec* best,
                                            const char* method,
                                            int iterations) {
  CounterfactualReport r;
  r.method = method;
  r.diagnostics.iterations = iterations;
  if (!best) {
    r.failure = "NotFound";
    r.diagnostics.status = SolveStatus::MaxIterations;
    return r;
  }
  r.found = true;
  r.point = *best;
  r.deltas = sub(*best, q.x);
  r.reg_value = eval_regularizer(q.reg, q.x, *best);
  r.achieved = predict(e, *best);
  r.diagnostics.status = SolveStatus::Optimal;
  r.diagnostics.objective = r.reg_value;
  return r;
}

}  // namespace detail

// Search heuristic: start from each tree's own counterfactual and descend
// (#trees not yielding the target) + c * regularizer with the simplex method;
// keep the best point that makes the whole ensemble agree. May miss (the
// exact problem is intractable in general), in which case NotFound.
inline CounterfactualReport ensemble_counterfactual_a(
    const EnsembleModel& e, const CounterfactualQuery& q) {
  const bool mean_agg = e.aggregation == Aggregation::Mean;
  if (detail::ensemble_valid(e, q.x, q))
    return detail::ensemble_report(e, q, &q.x, "ensemble-a", 0);

  auto objective = [&](const Vec& z) {
    double bad = 0.0;
    for (const auto& t : e.trees)
      if (detail::tree_disagrees(t, z, q, mean_agg)) bad += 1.0;
    return bad + q.ensemble_c * eval_regularizer(q.reg, q.x, z);
  };

  bool have = false;
  Vec best;
  double best_val = 0.0;
  int iterations = 0;
  auto offer = [&](const Vec& z) {
    if (!detail::ensemble_valid(e, z, q)) return;
    double v = eval_regularizer(q.reg, q.x, z);
    if (!have || v < best_val) {
      have = true;
      best = z;
      best_val = v;
    }
  };

  for (const auto& t : e.trees) {
    Vec start;
    try {
      CounterfactualQuery sq = q;
      start = tree_counterfactual(t, sq).point;
    } catch (const NoSuchPrediction&) {
      continue;  // this tree cannot vote for the target at all
    }
    offer(start);
    NmResult nm = downhill_simplex(objective, start, {});
    iterations += nm.iterations;
    offer(nm.point);
  }
  return detail::ensemble_report(e, q, have ? &best : nullptr, "ensemble-a",
                                 iterations);
}

// Candidate heuristic: for each tree currently not yielding the target,
// every per-path minimal change is a candidate; keep those the full ensemble
// accepts. Exhaustive per tree but not jointly, so NotFound is possible even
// when a counterfactual exists.
inline CounterfactualReport ensemble_counterfactual_b(
    const EnsembleModel& e, const CounterfactualQuery& q) {
  const bool mean_agg = e.aggregation == Aggregation::Mean;
  if (detail::ensemble_valid(e, q.x, q))
    return detail::ensemble_report(e, q, &q.x, "ensemble-b", 0);

  std::vector<Vec> seen;
  bool have = false;
  Vec best;
  double best_val = 0.0;
  int candidates = 0;
  for (const auto& t : e.trees) {
    if (!detail::tree_disagrees(t, q.x, q, mean_agg)) continue;
    for (const auto& p :
         enumerate_paths(t, q.target - q.tol, q.target + q.tol)) {
      Vec z = path_min_change(q.x, p, q.reg, q.delta_split).point;
      if (std::find(seen.begin(), seen.end(), z) != seen.end()) continue;
      seen.push_back(z);
      ++candidates;
      if (!detail::ensemble_valid(e, z, q)) continue;
      double v = eval_regularizer(q.reg, q.x, z);
      if (!have || v < best_val) {
        have = true;
        best = z;
        best_val = v;
      }
    }
  }
  return detail::ensemble_report(e, q, have ? &best : nullptr, "ensemble-b",
                                 candidates);
}

}  // namespace cfx
