#pragma once

#include <optional>
#include <vector>

#include "fad/dataset.hpp"
#include "fad/report.hpp"
#include "fad/thread_pool.hpp"

namespace fad {

// Population parameters behind a simulated dataset (covariance scale).
struct TruthParams {
  Matrix lambda;  // p x q_true
  Vector psi;     // length p
};

// Relative Frobenius errors against the truth; R and Lambda Lambda' on the
// correlation scale, Gamma compared through its canonical diagonal (the
// signal matrix is scale-invariant).
struct TruthErrors {
  double d_r = 0.0;
  double d_gamma = 0.0;
  double d_llt = 0.0;
};

struct ComparisonReport {
  std::optional<TruthErrors> truth_a;
  std::optional<TruthErrors> truth_b;
  // Cross-method discrepancies, relative to fit b.
  double d_psi = 0.0;
  double d_gamma = 0.0;
  double d_llt = 0.0;
  double d_r = 0.0;
  double d_loglik = 0.0;
  double speed_ratio = 0.0;  // wall time of b over wall time of a
};

// ||L1 L1' + diag(d1) - L0 L0' - diag(d0)||_F via q x q Gram products and
// diagonal corrections; no p x p matrix is ever formed.
double frob_diff_lowrank_diag(const Matrix& l1, const Vector& d1, const Matrix& l0,
                              const Vector& d0);
double frob_lowrank_diag(const Matrix& l0, const Vector& d0);

// Rescales (lambda, psi) so that diag(LL' + D) = 1 (cov2cor in factored form).
void to_correlation_factored(Matrix& lambda, Vector& psi);

TruthErrors truth_errors(const FitReport& fit, const TruthParams& truth);

// Cross-method and truth comparison; both fits must share data and q.
ComparisonReport compare_fits(const FitReport& a, const FitReport& b,
                              const TruthParams* truth = nullptr);

struct SelectResult {
  int q_best = 0;
  std::vector<FitReport> reports;  // k = 1..k_max in order
};

// Fits k = 1..k_max (independently initialized, parallel over k when a pool
// is given) and picks the BIC minimizer; ties break toward smaller k.
// Individual fit failures are recorded in their reports and skipped.
SelectResult select_q(const DataSet& data, int k_max, Method method, const FitConfig& cfg,
                      ThreadPool* pool = nullptr);

}  // namespace fad
