#pragma once

#include <functional>

#include "fad/types.hpp"

namespace fad {

// Fused objective: returns f(x) and fills grad with the gradient of f.
// maximize() issues exactly one such call per line-search trial.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

enum class OptStatus { converged, max_iter, line_search_failed };

inline const char* to_string(OptStatus s) {
  switch (s) {
    case OptStatus::converged: return "converged";
    case OptStatus::max_iter: return "max_iter";
    default: return "line_search_failed";
  }
}

struct LbfgsbConfig {
  int memory = 7;         // correction pairs kept
  int max_iter = 10000;
  double f_rtol = 100.0 * 2.220446049250313e-16;  // relative increase threshold
  double g_tol = 1.4901161193847656e-08;          // projected-gradient inf-norm (sqrt eps)
  int max_ls_trials = 40;
  double armijo_c1 = 1e-4;
};

struct FitTrace {
  int iterations = 0;
  int objective_calls = 0;
  int ls_trials = 0;
  double f_best = 0.0;
  double proj_grad_norm = 0.0;
  OptStatus status = OptStatus::max_iter;
};

// Maximizes the fused objective over the box [lo, hi] by projected-gradient
// active-set identification plus two-loop-recursion quasi-Newton steps on the
// free variables, with backtracking Armijo line search on the negated
// objective. Terminates when the relative value increase drops below f_rtol
// AND the projected gradient inf-norm drops below g_tol, or at max_iter.
// x0 must lie strictly inside the box. Iterates stay inside [lo, hi] exactly.
std::pair<Vector, FitTrace> maximize(const Objective& objective, const Vector& x0,
                                     const Vector& lo, const Vector& hi,
                                     const LbfgsbConfig& cfg = {});

}  // namespace fad
