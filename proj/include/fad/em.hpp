#pragma once

#include "fad/dataset.hpp"
#include "fad/report.hpp"

namespace fad {

struct EmState {
  Matrix lambda;  // p x q
  Vector psi;     // length p
  double loglik = 0.0;
  int iter = 0;
};

// One EM iteration, entirely matrix-free: S Psi^{-1} Lambda is built from two
// passes over the data and Sigma^{-1} is applied through the Woodbury
// identity, so only n x q and p x q intermediates exist. The returned state
// carries the full log-likelihood of the updated parameters.
EmState em_step(const EmState& state, const DataSet& data, const FitConfig& cfg);

// EM baseline with the shared principal-component initialization. Stops when
// the relative log-likelihood change falls below em_rtol and the gradient
// surrogate falls below em_g_tol, or flags hit_max_iter at em_max_iter.
FitReport fit_em(const DataSet& data, int q, const FitConfig& cfg);

}  // namespace fad
