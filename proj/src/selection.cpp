#include "fad/selection.hpp"

#include <cmath>
#include <limits>

#include "fad/em.hpp"
#include "fad/fit.hpp"
#include "fad/likelihood.hpp"

namespace fad {

double frob_lowrank_diag(const Matrix& l, const Vector& d) {
  const Matrix gram = l.transpose() * l;
  const Vector rowsq = l.array().square().matrix().rowwise().sum();
  const double t = gram.squaredNorm() + 2.0 * d.dot(rowsq) + d.squaredNorm();
  return std::sqrt(std::max(0.0, t));
}

double frob_diff_lowrank_diag(const Matrix& l1, const Vector& d1, const Matrix& l0,
                              const Vector& d0) {
  check(l1.rows() == l0.rows() && d1.size() == d0.size() && d1.size() == l1.rows(),
        "frob_diff_lowrank_diag: dimension mismatch");
  // ||L1L1' - L0L0'||_F^2 = ||L1'L1||^2 + ||L0'L0||^2 - 2||L0'L1||^2
  const double t_low = (l1.transpose() * l1).squaredNorm() +
                       (l0.transpose() * l0).squaredNorm() -
                       2.0 * (l0.transpose() * l1).squaredNorm();
  const Vector dd = d1 - d0;
  const Vector rowsq1 = l1.array().square().matrix().rowwise().sum();
  const Vector rowsq0 = l0.array().square().matrix().rowwise().sum();
  const double t_cross = 2.0 * dd.dot(rowsq1 - rowsq0);
  const double t_diag = dd.squaredNorm();
  return std::sqrt(std::max(0.0, t_low + t_cross + t_diag));
}

void to_correlation_factored(Matrix& lambda, Vector& psi) {
  Vector diag = psi;
  if (lambda.cols() > 0) diag += lambda.array().square().matrix().rowwise().sum();
  const Vector inv_sqrt = diag.array().rsqrt();
  lambda = inv_sqrt.asDiagonal() * lambda;
  psi.array() *= inv_sqrt.array().square();
}

TruthErrors truth_errors(const FitReport& fit, const TruthParams& truth) {
  check(fit.scale == ScaleMode::correlation,
        "truth_errors: expects a correlation-scale fit");
  check(fit.lambda_hat.rows() == truth.lambda.rows(), "truth_errors: dimension mismatch");

  Matrix lt = truth.lambda;
  Vector pt = truth.psi;
  to_correlation_factored(lt, pt);

  Matrix lf = fit.lambda_hat;
  Vector pf = fit.psi_hat;
  to_correlation_factored(lf, pf);  // near-identity at convergence

  TruthErrors e;
  e.d_r = frob_diff_lowrank_diag(lf, pf, lt, pt) / frob_lowrank_diag(lt, pt);

  const Vector zf = Vector::Zero(pf.size());
  e.d_llt = frob_diff_lowrank_diag(lf, zf, lt, zf) /
            std::max(frob_lowrank_diag(lt, zf), 1e-300);

  // Gamma is scale-invariant; compare canonical diagonals.
  const Vector gf = gamma_diagonal(fit.lambda_hat, fit.psi_hat);
  const Vector gt = gamma_diagonal(truth.lambda, truth.psi);
  if (gt.size() == 0) {
    e.d_gamma = gf.size() == 0 ? 0.0 : gf.norm();
  } else {
    Vector gfp = Vector::Zero(std::max(gf.size(), gt.size()));
    Vector gtp = gfp;
    gfp.head(gf.size()) = gf;
    gtp.head(gt.size()) = gt;
    e.d_gamma = (gfp - gtp).norm() / gtp.norm();
  }
  return e;
}

ComparisonReport compare_fits(const FitReport& a, const FitReport& b,
                              const TruthParams* truth) {
  check(a.q == b.q, "compare_fits: fits have different q");
  check(a.psi_hat.size() == b.psi_hat.size(), "compare_fits: dimension mismatch");
  check(a.scale == b.scale, "compare_fits: fits on different scales");

  ComparisonReport r;
  if (truth) {
    r.truth_a = truth_errors(a, *truth);
    r.truth_b = truth_errors(b, *truth);
  }
  r.d_psi = (a.psi_hat - b.psi_hat).norm() / b.psi_hat.norm();
  const Vector ga = gamma_diagonal(a.lambda_hat, a.psi_hat);
  const Vector gb = gamma_diagonal(b.lambda_hat, b.psi_hat);
  r.d_gamma = (ga - gb).norm() / std::max(gb.norm(), 1e-300);
  const Vector z = Vector::Zero(a.psi_hat.size());
  r.d_llt = frob_diff_lowrank_diag(a.lambda_hat, z, b.lambda_hat, z) /
            std::max(frob_lowrank_diag(b.lambda_hat, z), 1e-300);
  r.d_r = frob_diff_lowrank_diag(a.lambda_hat, a.psi_hat, b.lambda_hat, b.psi_hat) /
          frob_lowrank_diag(b.lambda_hat, b.psi_hat);
  r.d_loglik = std::abs(a.loglik - b.loglik) / std::max(1.0, std::abs(b.loglik));
  r.speed_ratio = a.wall_time_seconds > 0.0
                      ? b.wall_time_seconds / a.wall_time_seconds
                      : 0.0;
  return r;
}

SelectResult select_q(const DataSet& data, int k_max, Method method, const FitConfig& cfg,
                      ThreadPool* pool) {
  check(k_max >= 1 && k_max <= std::min(data.n(), data.p()) - 1,
        "select_q: need 1 <= k_max <= min(n,p)-1");

  SelectResult out;
  out.reports.resize(k_max);

  auto fit_one = [&](int idx) {
    const int k = idx + 1;
    try {
      out.reports[idx] =
          method == Method::fad ? fit_fad(data, k, cfg) : fit_em(data, k, cfg);
    } catch (const std::exception& e) {
      FitReport fail;
      fail.method = method;
      fail.q = k;
      fail.scale = cfg.scale;
      fail.bic = std::numeric_limits<double>::infinity();
      fail.error = e.what();
      out.reports[idx] = std::move(fail);
    }
  };

  if (pool) {
    pool->run_indexed(k_max, fit_one);
  } else {
    for (int i = 0; i < k_max; ++i) fit_one(i);
  }

  double best = std::numeric_limits<double>::infinity();
  int q_best = 0;
  for (const auto& rep : out.reports) {
    if (!rep.ok()) continue;
    if (rep.bic < best) {  // strict: ties stay with the smaller k
      best = rep.bic;
      q_best = rep.q;
    }
  }
  check(q_best > 0, "select_q: every fit failed");
  out.q_best = q_best;
  return out;
}

}  // namespace fad
