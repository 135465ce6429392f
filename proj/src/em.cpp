#include "fad/em.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <numbers>

#include "fad/fit.hpp"
#include "fad/likelihood.hpp"

namespace fad {

namespace {

using Clock = std::chrono::steady_clock;

// Everything one iteration touches; O((n+p)q) by construction.
struct EmWorkspace {
  Matrix x;   // p x q, Psi^{-1} Lambda
  Matrix t;   // n x q, centered-scaled data times x
  Matrix a;   // p x q, S x
  Matrix m;   // q x q, I + Lambda' x
  Matrix g;   // q x q, x' a
  Vector rowsq;  // p, diag(Lambda Lambda')
};

struct StepResult {
  Matrix lambda_next;
  Vector psi_next;
  double loglik = 0.0;     // log-likelihood of the INPUT state
  double grad_inf = 0.0;   // n/2 * ||diag(S - LL' - Psi)||_inf at the input
};

// The Lambda update is Eq.-(7)-equivalent: Lambda_next = A (M + G)^{-1} M
// with A = S Psi^{-1} Lambda, M = I + Lambda' Psi^{-1} Lambda, G = X' A.
// The Psi update uses diag(S - Lambda_next (Sigma^{-1} Lambda)' S) with
// coefficient 1, the form that preserves the EM ascent property; the
// coefficient-2 variant is kept behind cfg.em_psi_update_coeff2.
StepResult em_update(const DataSet& data, const Matrix& lambda, const Vector& psi,
                     const FitConfig& cfg, EmWorkspace& ws) {
  const Index n = data.n();
  const Index p = data.p();

  const Vector sdiag = data.diag_s(cfg.scale);
  const Vector colscale = cfg.scale == ScaleMode::correlation
                              ? Vector(data.col_sd().cwiseInverse())
                              : Vector::Ones(p);

  ws.x = psi.cwiseInverse().asDiagonal() * lambda;
  ws.m.noalias() = lambda.transpose() * ws.x;
  ws.m.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt_m(ws.m);
  check(llt_m.info() == Eigen::Success, "em_step: I + L'Psi^{-1}L not positive definite");

  data.centered_mult(colscale, ws.x, ws.t);
  data.centered_tmult(colscale, ws.t, ws.a);
  ws.a /= double(n);  // A = S Psi^{-1} Lambda
  ws.g.noalias() = ws.x.transpose() * ws.a;

  StepResult out;

  // Log-likelihood of the input state via the Woodbury/determinant-lemma
  // expansion; A is already in hand so this costs only q x q work.
  const double log_det_m = 2.0 * llt_m.matrixLLT().diagonal().array().log().sum();
  const double log_det_psi = psi.array().log().sum();
  const double tr_psi_inv_s = (sdiag.array() / psi.array()).sum();
  const double tr_corr = llt_m.solve(ws.g).trace();
  out.loglik = -0.5 * double(n) *
               (double(p) * std::log(2.0 * std::numbers::pi) + log_det_psi + log_det_m +
                tr_psi_inv_s - tr_corr);

  // Gradient surrogate in the stopping rule's units (the -1/psi
  // parameterization): n/2 ||diag(S - LL' - Psi)||_inf.
  ws.rowsq = lambda.array().square().matrix().rowwise().sum();
  out.grad_inf =
      0.5 * double(n) * (sdiag - ws.rowsq - psi).lpNorm<Eigen::Infinity>();

  Matrix mg = ws.m + ws.g;
  Eigen::LLT<Matrix> llt_mg(mg);
  check(llt_mg.info() == Eigen::Success, "em_step: M + X'SX not positive definite");
  out.lambda_next.noalias() = ws.a * llt_mg.solve(ws.m);

  // B = A M^{-1} = S Sigma^{-1} Lambda
  const Matrix b = llt_m.solve(ws.a.transpose()).transpose();
  const double coeff = cfg.em_psi_update_coeff2 ? 2.0 : 1.0;
  out.psi_next =
      sdiag - coeff * (out.lambda_next.array() * b.array()).rowwise().sum().matrix();

  const Vector lo = cfg.psi_lo * sdiag;
  const Vector hi = cfg.psi_hi * sdiag;
  out.psi_next = out.psi_next.cwiseMax(lo).cwiseMin(hi);
  return out;
}

}  // namespace

EmState em_step(const EmState& state, const DataSet& data, const FitConfig& cfg) {
  check(state.lambda.rows() == data.p() && state.psi.size() == data.p(),
        "em_step: dimension mismatch");
  EmWorkspace ws;
  StepResult step = em_update(data, state.lambda, state.psi, cfg, ws);
  EmState next;
  next.lambda = std::move(step.lambda_next);
  next.psi = std::move(step.psi_next);
  next.loglik = full_loglik(data, next.lambda, next.psi, cfg.scale);
  next.iter = state.iter + 1;
  return next;
}

FitReport fit_em(const DataSet& data, int q, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  const Index n = data.n();
  const Index p = data.p();
  check(q >= 1 && q <= p, "fit_em: need 1 <= q <= p");

  FitReport rep;
  rep.method = Method::em;
  rep.q = q;
  rep.scale = cfg.scale;

  Initialization init = pca_initialization(data, q, cfg);
  rep.lanczos_calls = init.lanczos_calls;

  Matrix lambda = std::move(init.lambda0);
  Vector psi = std::move(init.psi0);

  EmWorkspace ws;
  double prev_loglik = 0.0;
  double loglik = 0.0;
  double grad_inf = 0.0;
  double min_rel_increase = 0.0;
  int iter = 0;
  bool converged = false;

  for (;; ++iter) {
    StepResult step = em_update(data, lambda, psi, cfg, ws);
    loglik = step.loglik;
    grad_inf = step.grad_inf;

    if (iter > 0) {
      const double rel = (loglik - prev_loglik) / std::max(1.0, std::abs(prev_loglik));
      min_rel_increase = std::min(min_rel_increase, rel);
      if (std::abs(rel) < cfg.em_rtol && grad_inf < cfg.em_g_tol) {
        converged = true;
        break;
      }
    }
    if (iter >= cfg.em_max_iter) break;

    prev_loglik = loglik;
    lambda = std::move(step.lambda_next);
    psi = std::move(step.psi_next);
  }

  rep.psi_hat = psi;
  rep.lambda_hat = canonicalize_loadings(lambda, psi);
  rep.loglik = loglik;
  rep.bic = bic_value(loglik, p, q, n);
  rep.grad_inf_norm = grad_inf;
  rep.iterations = iter;
  rep.converged = converged;
  rep.hit_max_iter = !converged && iter >= cfg.em_max_iter;
  rep.em_min_rel_increase = min_rel_increase;
  const Vector sdiag = data.diag_s(cfg.scale);
  rep.score_residual_inf =
      (sdiag - lambda.array().square().matrix().rowwise().sum().matrix() - psi)
          .lpNorm<Eigen::Infinity>();
  rep.wall_time_seconds =
      std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace fad
