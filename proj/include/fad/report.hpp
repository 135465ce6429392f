#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "fad/lbfgsb.hpp"
#include "fad/svd.hpp"
#include "fad/types.hpp"

namespace fad {

enum class Method { fad, em };

inline const char* to_string(Method m) { return m == Method::fad ? "fad" : "em"; }

struct FitConfig {
  ScaleMode scale = ScaleMode::correlation;
  // Box for psi on the correlation scale; covariance-scale fits use
  // [psi_lo, psi_hi] * diag(S) so the box stays scale-equivariant.
  double psi_lo = 0.005;
  double psi_hi = 1.0;
  LbfgsbConfig lbfgs;
  double em_rtol = 1e-6;
  int em_max_iter = 5000;
  double em_g_tol = 1.4901161193847656e-08;  // sqrt machine epsilon
  // The optimizer's sqrt-eps gradient tolerance needs Ritz vectors well past
  // the reporting default of 1e-9, or clustered overfit spectra leave the
  // gradient noisier than g_tol.
  SvdConfig svd{1e-12, 1000, 0};
  std::uint64_t seed = 0;
  // Debug only: the alternative Psi update with coefficient 2 instead of the
  // ascent-preserving coefficient 1.
  bool em_psi_update_coeff2 = false;
};

struct FitReport {
  Method method = Method::fad;
  int q = 0;
  double loglik = 0.0;  // full log-likelihood on the fitting scale
  double bic = 0.0;
  Vector psi_hat;
  Matrix lambda_hat;  // canonical: Gamma diagonal nonincreasing, signs fixed
  double grad_inf_norm = 0.0;
  int iterations = 0;
  long lanczos_calls = 0;
  int objective_calls = 0;  // fad: fused value+gradient evaluations
  double wall_time_seconds = 0.0;
  bool converged = false;
  bool hit_max_iter = false;
  ScaleMode scale = ScaleMode::correlation;
  double score_residual_inf = 0.0;   // ||diag(S - LL' - Psi)||_inf, fitting scale
  double em_min_rel_increase = 0.0;  // most negative per-step relative change
  std::string error;                 // nonempty when the fit failed

  bool ok() const { return error.empty(); }
};

inline double bic_value(double loglik, Index p, int k, Index n) {
  return -2.0 * loglik + double(p) * double(k) * std::log(double(n));
}

}  // namespace fad
