#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfx/linalg.hpp"

namespace cfx {

// One inequality in canonical form  1/2 z^T A z + q^T z + c <= 0.
// An empty A means the row is linear. Rows born from strict inequalities
// carry strict=true until the engine folds its margin into c.
struct QuadIneq {
  Mat a;
  Vec q;
  double c = 0.0;
  bool strict = false;

  // difference-of-convex split: a == a_convex - a_concave, both PSD.
  // Empty matrices mean "no split needed" (linear or convex row).
  Mat a_convex;
  Mat a_concave;

  bool is_linear() const { return a.empty(); }
  bool has_dc_split() const { return !a_concave.empty(); }

  double value(const Vec& z) const {
    double v = c + dot(q, z);
    if (!a.empty()) v += 0.5 * dot(z, a.mul(z));
    return v;
  }

  Vec gradient(const Vec& z) const {
    Vec g = q;
    if (!a.empty()) axpy(g, 1.0, a.mul(z));
    return g;
  }
};

struct ConstraintSet {
  std::size_t dim = 0;
  std::vector<QuadIneq> rows;

  bool any_quadratic() const {
    for (const auto& r : rows)
      if (!r.is_linear()) return true;
    return false;
  }

  double max_violation(const Vec& z) const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.value(z));
    return m;
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

struct ProgramSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Vec point;
  double objective = 0.0;
  int iterations = 0;

  // KKT diagnostics, populated on Optimal
  double max_violation = 0.0;   // max_i f_i(z), <= 0 when feasible
  double stationarity = 0.0;    // ||grad f0 + sum lambda_i grad f_i||_inf
  double complementarity = 0.0; // max_i |lambda_i f_i(z)|
  double gap = 0.0;             // duality measure where the method provides one
  Vec multipliers;
};

}  // namespace cfx
