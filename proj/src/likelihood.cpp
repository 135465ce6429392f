#include "fad/likelihood.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "fad/operators.hpp"

namespace fad {

namespace {

// theta within [1, 1 + 1e-10] collapses to exactly 1 so Delta_ii = 0 and the
// gradient carries no noise from the max(theta-1, 0) kink.
constexpr double kThetaClamp = 1.0 + 1e-10;

double clamp_theta(double theta) { return theta <= kThetaClamp ? 1.0 : theta; }

}  // namespace

ProfileEval profile_eval(const DataSet& data, const Vector& psi, int q, ScaleMode scale,
                         const SvdConfig& svd) {
  const Index n = data.n();
  const Index p = data.p();
  check(q >= 1, "profile_eval: q must be >= 1");
  check(psi.size() == p, "profile_eval: psi has wrong length");

  ImplicitW w(data, psi, scale);
  SingularTriplets trip = partial_svd(w, q, svd);
  if (!trip.converged)
    throw FadError("partial SVD did not converge after " + std::to_string(trip.restarts) +
                   " restarts (residual " + std::to_string(trip.residuals.maxCoeff()) + ")");

  ProfileEval ev;
  ev.theta = trip.values.array().square();
  ev.right_vectors = std::move(trip.right_vectors);
  ev.svd_restarts = trip.restarts;
  ev.svd_converged = trip.converged;
  ev.matvecs = trip.matvecs;

  check((ev.theta.array() >= 0.0).all(), "profile_eval: negative theta");

  double sum_phi = 0.0;
  Vector delta2(q);  // theta_i - 1 after clamping
  for (int i = 0; i < q; ++i) {
    delta2[i] = clamp_theta(ev.theta[i]) - 1.0;
    const double phi = std::log1p(delta2[i]) - delta2[i];
    check(phi <= 0.0, "profile_eval: log theta - theta + 1 must be <= 0");
    sum_phi += phi;
  }

  const Vector sdiag = data.diag_s(scale);
  const double log_det_psi = psi.array().log().sum();
  const double tr_psi_inv_s = (sdiag.array() / psi.array()).sum();

  const double c = -0.5 * double(n) * double(p) * std::log(2.0 * std::numbers::pi);
  ev.value = c - 0.5 * double(n) * (log_det_psi + tr_psi_inv_s + sum_phi);

  // diag(Lambda_hat Lambda_hat')_j = psi_j * sum_k V(j,k)^2 (theta_k - 1)
  ev.communality =
      psi.array() * (ev.right_vectors.array().square().matrix() * delta2).array();
  // d l_p / d psi_j: the score-equation residual scaled by psi_j^{-2}; the
  // scaling follows from differentiating the eigenvalues of
  // Psi^{-1/2} S Psi^{-1/2} and matches central differences of the value.
  ev.gradient = -0.5 * double(n) *
                ((ev.communality + psi - sdiag).array() / psi.array().square());
  return ev;
}

Loadings recover_loadings(const ProfileEval& eval, const Vector& psi) {
  const Index p = psi.size();
  const int q = static_cast<int>(eval.theta.size());
  check(eval.right_vectors.rows() == p && eval.right_vectors.cols() == q,
        "recover_loadings: eval does not carry V_q");
  Loadings out;
  out.lambda.resize(p, q);
  const Vector sqrt_psi = psi.array().sqrt();
  for (int k = 0; k < q; ++k) {
    const double t = clamp_theta(eval.theta[k]);
    if (t <= 1.0) {
      out.lambda.col(k).setZero();
    } else {
      out.lambda.col(k) = std::sqrt(t - 1.0) * sqrt_psi.cwiseProduct(eval.right_vectors.col(k));
    }
  }
  return out;
}

double full_loglik(const DataSet& data, const Matrix& lambda, const Vector& psi,
                   ScaleMode scale) {
  const Index n = data.n();
  const Index p = data.p();
  const Index q = lambda.cols();
  check(psi.size() == p && (lambda.rows() == p || q == 0), "full_loglik: dimension mismatch");
  check((psi.array() > 0.0).all(), "full_loglik: psi must be positive");

  const Vector sdiag = data.diag_s(scale);
  const double log_det_psi = psi.array().log().sum();
  const double tr_psi_inv_s = (sdiag.array() / psi.array()).sum();

  double log_det_m = 0.0;
  double tr_correction = 0.0;
  if (q > 0) {
    const Matrix x = psi.cwiseInverse().asDiagonal() * lambda;  // Psi^{-1} Lambda
    Matrix m = x.transpose() * lambda;
    m.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(m);
    check(llt.info() == Eigen::Success, "full_loglik: I + L'Psi^{-1}L not positive definite");
    log_det_m = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

    // Tr Sigma^{-1} S = Tr Psi^{-1} S - Tr(M^{-1} X' S X), with S X built
    // from two passes over the data.
    Vector colscale = scale == ScaleMode::correlation
                          ? Vector(data.col_sd().cwiseInverse())
                          : Vector::Ones(p);
    Matrix t;
    data.centered_mult(colscale, x, t);
    Matrix sx;
    data.centered_tmult(colscale, t, sx);
    sx /= double(n);
    const Matrix xsx = x.transpose() * sx;
    tr_correction = llt.solve(xsx).trace();
  }

  const double log_det_sigma = log_det_psi + log_det_m;
  const double tr_sigma_inv_s = tr_psi_inv_s - tr_correction;
  return -0.5 * double(n) *
         (double(p) * std::log(2.0 * std::numbers::pi) + log_det_sigma + tr_sigma_inv_s);
}

std::pair<Loadings, Vector> rescale_to_covariance(const Loadings& lambda_corr,
                                                  const Vector& psi_corr,
                                                  const DataSet& data) {
  Loadings lambda_cov;
  lambda_cov.lambda = data.col_sd().asDiagonal() * lambda_corr.lambda;
  Vector psi_cov = data.col_sd().array().square() * psi_corr.array();
  return {std::move(lambda_cov), std::move(psi_cov)};
}

Matrix canonicalize_loadings(const Matrix& lambda, const Vector& psi) {
  const Index q = lambda.cols();
  if (q == 0) return lambda;
  const Matrix gamma = lambda.transpose() * (psi.cwiseInverse().asDiagonal() * lambda);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma);
  check(eig.info() == Eigen::Success, "canonicalize_loadings: eigensolver failed");
  // Eigen sorts ascending; we want nonincreasing Gamma diagonal.
  Matrix rot(q, q);
  for (Index k = 0; k < q; ++k) rot.col(k) = eig.eigenvectors().col(q - 1 - k);
  Matrix out = lambda * rot;
  for (Index k = 0; k < q; ++k) {
    Index imax;
    out.col(k).cwiseAbs().maxCoeff(&imax);
    if (out(imax, k) < 0.0) out.col(k) = -out.col(k);
  }
  return out;
}

Vector gamma_diagonal(const Matrix& lambda, const Vector& psi) {
  const Index q = lambda.cols();
  if (q == 0) return Vector();
  const Matrix gamma = lambda.transpose() * (psi.cwiseInverse().asDiagonal() * lambda);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gamma);
  check(eig.info() == Eigen::Success, "gamma_diagonal: eigensolver failed");
  return eig.eigenvalues().reverse();
}

}  // namespace fad
