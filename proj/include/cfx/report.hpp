#pragma once

#include <string>

#include "cfx/linalg.hpp"
#include "cfx/program.hpp"
#include "cfx/regularizer.hpp"

namespace cfx {

struct CounterfactualQuery {
  Vec x;                // original input
  double target = 0.0;  // requested prediction: a class label or a real value
  Regularizer reg;
  double margin = 1e-4;  // relaxation of strict classification boundaries, > 0
  double tol = 0.0;      // accepted deviation for regression targets, >= 0

  double delta_split = 1e-6;  // how far past a tree threshold to step
  double ensemble_c = 0.1;    // distance weight in the ensemble search
};

struct CounterfactualReport {
  bool found = false;
  Vec point;   // x', empty when nothing was found
  Vec deltas;  // x' - x
  double reg_value = 0.0;
  double achieved = 0.0;  // model prediction at x'
  // one of: lp, qp, ccp, dual-qcqp, tree, ensemble-a, ensemble-b, blackbox
  std::string method;
  // why found == false: "Infeasible" (proved empty under the given
  // relaxation) or "NotFound" (heuristic gave up, no proof)
  std::string failure;
  ProgramSolution diagnostics;
};

}  // namespace cfx
