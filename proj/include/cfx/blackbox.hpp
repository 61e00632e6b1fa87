#pragma once

#include <cmath>
#include <random>

#include "cfx/engine.hpp"
#include "cfx/model.hpp"
#include "cfx/report.hpp"
#include "cfx/solvers/nelder_mead.hpp"

namespace cfx {

// Model-agnostic fallback: minimize loss(h(z), target) + c * reg(z, x) with
// the simplex method from the original input plus perturbed restarts.
// Classification pays 0-1 loss, regression squared loss. Validity is judged
// by the shared target_validator, so the search competes on the same
// margin-folded playing field as the dedicated paths.
//
// Because the scalarized objective can prefer an invalid point near x over a
// distant valid one, the best *valid* point evaluated anywhere during the
// search is tracked and returned, not the final simplex vertex.
inline CounterfactualReport blackbox_counterfactual(
    const Model& m, const CounterfactualQuery& q, int restarts = 10,
    double sigma = 1.0, unsigned long long seed = 271828182ull,
    double c = 1.0) {
  const bool regression = is_regressor(m);
  auto valid = target_validator(m, q);

  bool have = false;
  Vec best;
  double best_val = 0.0;
  auto offer = [&](const Vec& z) {
    if (!valid(z)) return;
    double v = eval_regularizer(q.reg, q.x, z);
    if (!have || v < best_val) {
      have = true;
      best = z;
      best_val = v;
    }
  };

  auto objective = [&](const Vec& z) {
    offer(z);
    double loss;
    double pred;
    try {
      pred = predict(m, z);
      if (regression)
        loss = (pred - q.target) * (pred - q.target);
      else
        loss = pred == q.target ? 0.0 : 1.0;
    } catch (const EvaluationError&) {
      loss = 1e18;
    }
    return loss + c * eval_regularizer(q.reg, q.x, z);
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  int iterations = 0;
  // the 0-1 plateau gives the simplex no pull toward the valid side, so each
  // restart opens with wide vertices, signs alternating across restarts
  NmParams prm;
  prm.initial_offsets.assign(q.x.size(), 0.0);
  for (int r = 0; r < restarts; ++r) {
    Vec start = q.x;
    if (r > 0)
      for (double& v : start) v += noise(rng);
    for (std::size_t j = 0; j < q.x.size(); ++j)
      prm.initial_offsets[j] =
          ((j + static_cast<std::size_t>(r)) % 2 == 0 ? 2.5 : -2.5) * sigma;
    NmResult nm = downhill_simplex(objective, start, prm);
    iterations += nm.iterations;
  }

  CounterfactualReport out;
  out.method = "blackbox";
  out.diagnostics.iterations = iterations;
  if (!have) {
    out.failure = "NotFound";
    out.diagnostics.status = SolveStatus::MaxIterations;
    return out;
  }
  try {
    out.achieved = predict(m, best);
  } catch (const EvaluationError&) {
    out.failure = "NotFound";
    out.diagnostics.status = SolveStatus::MaxIterations;
    return out;
  }
  out.found = true;
  out.point = best;
  out.deltas = sub(best, q.x);
  out.reg_value = best_val;
  out.diagnostics.status = SolveStatus::Optimal;
  out.diagnostics.objective = best_val;
  return out;
}

}  // namespace cfx
