#pragma once

#include "fad/dataset.hpp"
#include "fad/svd.hpp"
#include "fad/types.hpp"

namespace fad {

// Loading matrix satisfying the identifiability constraint: Gamma =
// Lambda' Psi^{-1} Lambda diagonal with nonincreasing diagonal.
struct Loadings {
  Matrix lambda;  // p x q
};

// One fused evaluation of the profile log-likelihood: value, analytic
// gradient, and the singular quantities needed to materialize the loadings.
struct ProfileEval {
  double value = 0.0;
  Vector gradient;       // d l_p / d psi_j
  Vector theta;          // squared singular values of W, nonincreasing
  Matrix right_vectors;  // V_q, p x q
  Vector communality;    // diag(Lambda_hat Lambda_hat'), length p
  int svd_restarts = 0;
  bool svd_converged = false;
  long matvecs = 0;
};

// Profile log-likelihood at psi with the loadings maximized out:
//   l_p(psi) = c - n/2 { log det Psi + Tr Psi^{-1} S + sum_i phi(theta_i) }
// with phi(t) = log t - t + 1 for t > 1 and 0 otherwise, c = -n/2 p log(2 pi).
// The clamping at theta = 1 makes the value equal the full log-likelihood at
// the maximizing loadings, including rank-deficient and near-null factors.
// Gradient: -n/2 (diag(Lambda_hat Lambda_hat') + psi - diag(S)). One partial
// SVD yields both quantities.
ProfileEval profile_eval(const DataSet& data, const Vector& psi, int q, ScaleMode scale,
                         const SvdConfig& svd);

// Lambda_hat = Psi^{1/2} V_q Delta with Delta_ii = max(theta_i - 1, 0)^{1/2};
// columns with theta_i <= 1 are exactly zero, order is nonincreasing theta.
Loadings recover_loadings(const ProfileEval& eval, const Vector& psi);

// Full log-likelihood -n/2 { p log 2pi + log det Sigma + Tr Sigma^{-1} S }
// computed matrix-free: log det Sigma = log det Psi + log det(I + L'Psi^{-1}L)
// and the trace via the Woodbury identity, using only n x q and p x q
// intermediates. lambda may have zero columns (q = 0 allowed).
double full_loglik(const DataSet& data, const Matrix& lambda, const Vector& psi,
                   ScaleMode scale);

// Maps a correlation-scale fit back to the covariance scale:
// Lambda_S[j,.] = sd_j * Lambda_R[j,.], psi_S[j] = sd_j^2 * psi_R[j].
std::pair<Loadings, Vector> rescale_to_covariance(const Loadings& lambda_corr,
                                                  const Vector& psi_corr,
                                                  const DataSet& data);

// Rotates loadings onto the identifiability constraint (Gamma diagonal,
// nonincreasing; largest-magnitude entry of each column positive). Fits via
// recover_loadings already satisfy it; the EM baseline needs this at exit.
Matrix canonicalize_loadings(const Matrix& lambda, const Vector& psi);

// Diagonal of Gamma = Lambda' Psi^{-1} Lambda in canonical (nonincreasing)
// order, i.e. the eigenvalues of the signal matrix.
Vector gamma_diagonal(const Matrix& lambda, const Vector& psi);

}  // namespace fad
