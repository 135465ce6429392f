#include "fad/fit.hpp"

#include <Eigen/SVD>
#include <chrono>

#include "fad/likelihood.hpp"
#include "fad/operators.hpp"
#include "fad/rng.hpp"

namespace fad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Initialization pca_initialization(const DataSet& data, int q, const FitConfig& cfg) {
  const Index n = data.n();
  const Index p = data.p();
  check(q >= 1 && q <= p, "initialization: need 1 <= q <= p");

  Initialization init;
  const Vector ones = Vector::Ones(p);
  Vector h;
  Matrix v;
  if (q <= std::min(n, p) - 1) {
    SvdConfig svd = cfg.svd;
    svd.seed = derive_stream(cfg.seed, 1);
    ImplicitW w(data, ones, cfg.scale);
    SingularTriplets trip = partial_svd(w, q, svd);
    h = std::move(trip.values);
    v = std::move(trip.right_vectors);
    init.lanczos_calls = 1;
  } else {
    // Toy sizes only (q = min(n,p) is out of Lanczos range): materialize W.
    Matrix wd(n, p);
    ImplicitW w(data, ones, cfg.scale);
    Vector e = Vector::Zero(p), col(n);
    for (Index j = 0; j < p; ++j) {
      e[j] = 1.0;
      w.apply(e, col);
      wd.col(j) = col;
      e[j] = 0.0;
    }
    Eigen::BDCSVD<Matrix> svd(wd, Eigen::ComputeThinV);
    h = svd.singularValues().head(q);
    v = svd.matrixV().leftCols(q);
  }

  init.lambda0 = v * h.asDiagonal();
  const Vector sdiag = data.diag_s(cfg.scale);
  const Vector lo = cfg.psi_lo * sdiag;
  const Vector hi = cfg.psi_hi * sdiag;
  Vector psi0 = sdiag - init.lambda0.array().square().matrix().rowwise().sum();
  // Strictly inside the box, as the optimizer requires.
  const Vector margin = 1e-10 * (hi - lo);
  init.psi0 = psi0.cwiseMax(lo + margin).cwiseMin(hi - margin);
  return init;
}

FitReport fit_fad(const DataSet& data, int q, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  const Index n = data.n();
  const Index p = data.p();
  check(q >= 1 && q <= std::min(n, p) - 1, "fit_fad: need 1 <= q <= min(n,p)-1");

  FitReport rep;
  rep.method = Method::fad;
  rep.q = q;
  rep.scale = cfg.scale;

  Initialization init = pca_initialization(data, q, cfg);
  long lanczos_calls = init.lanczos_calls;

  const Vector sdiag = data.diag_s(cfg.scale);
  const Vector lo = cfg.psi_lo * sdiag;
  const Vector hi = cfg.psi_hi * sdiag;

  // The search runs over xi = log psi: the box maps to a box and the
  // dominant curvature (n/2)/psi^2 of the psi geometry flattens to O(n),
  // which is what lets L-BFGS converge in tens of iterations. Through
  // dpsi/dxi = psi the chain rule gives the working gradient
  // -n/2 diag(LL' + Psi - S)/Psi, and the sqrt(eps) stopping rule is applied
  // to it (at psi <= 1 this is at least as strict as thresholding the
  // -n/2 diag(LL' + Psi - S) of the stopping rule's source).
  auto to_psi = [](const Vector& xi) { return Vector(xi.array().exp()); };

  Objective objective = [&](const Vector& xi, Vector& grad) {
    SvdConfig svd = cfg.svd;
    svd.seed = derive_stream(cfg.seed, 100 + lanczos_calls);
    ++lanczos_calls;
    const Vector psi = to_psi(xi);
    ProfileEval ev = profile_eval(data, psi, q, cfg.scale, svd);
    grad = ev.gradient.cwiseProduct(psi);
    return ev.value;
  };

  const Vector xi_lo = lo.array().log();
  const Vector xi_hi = hi.array().log();
  const Vector xi0 = init.psi0.array().log();
  auto [xi_hat, trace] = maximize(objective, xi0, xi_lo, xi_hi, cfg.lbfgs);
  const Vector psi_hat = to_psi(xi_hat).cwiseMax(lo).cwiseMin(hi);

  // One final evaluation at the solution to materialize V_q and theta.
  SvdConfig svd = cfg.svd;
  svd.seed = derive_stream(cfg.seed, 100 + lanczos_calls);
  ++lanczos_calls;
  ProfileEval final_eval = profile_eval(data, psi_hat, q, cfg.scale, svd);

  rep.psi_hat = psi_hat;
  rep.lambda_hat = recover_loadings(final_eval, psi_hat).lambda;
  rep.loglik = final_eval.value;
  rep.bic = bic_value(rep.loglik, p, q, n);
  rep.grad_inf_norm = trace.proj_grad_norm;
  rep.iterations = trace.iterations;
  rep.objective_calls = trace.objective_calls;
  rep.lanczos_calls = lanczos_calls;
  rep.converged = trace.status == OptStatus::converged;
  rep.hit_max_iter = trace.status == OptStatus::max_iter;
  rep.score_residual_inf =
      (final_eval.communality + psi_hat - sdiag).lpNorm<Eigen::Infinity>();
  rep.wall_time_seconds = seconds_since(t0);
  return rep;
}

}  // namespace fad
