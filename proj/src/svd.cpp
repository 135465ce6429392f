#include "fad/svd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fad/rng.hpp"

namespace fad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Removes from v its components along the first k columns of basis; one pass
// of classical Gram-Schmidt, repeated while the norm keeps collapsing.
void reorthogonalize(const Matrix& basis, Index k, Vector& v) {
  if (k == 0) return;
  auto cols = basis.leftCols(k);
  for (int pass = 0; pass < 3; ++pass) {
    const double before = v.norm();
    v.noalias() -= cols * (cols.transpose() * v);
    if (v.norm() > 0.7 * before) return;
  }
}

struct SweepContext {
  const LinearOperator& op;
  Rng& rng;
  long matvecs = 0;

  Vector apply(const Vector& x) {
    Vector out;
    op.apply(x, out);
    ++matvecs;
    return out;
  }
  Vector apply_adjoint(const Vector& y) {
    Vector out;
    op.apply_adjoint(y, out);
    ++matvecs;
    return out;
  }

  // Fresh random unit vector orthogonal to the first k columns of basis;
  // used on breakdown (the corresponding recurrence coefficient is zeroed).
  Vector random_orthogonal(const Matrix& basis, Index k, Index dim) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v(dim);
      for (Index i = 0; i < dim; ++i) v[i] = rng.normal();
      reorthogonalize(basis, k, v);
      const double norm = v.norm();
      if (norm > 1e-8) return v / norm;
    }
    throw FadError("Lanczos breakdown: could not extend the orthonormal basis");
  }
};

double ortho_defect(const Matrix& basis) {
  Matrix gram = basis.transpose() * basis;
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

}  // namespace

int lanczos_basis_size(int q, Index n, Index p) {
  const Index cap = std::min(n, p);
  return static_cast<int>(std::min<Index>(std::max(2 * q + 1, 20), cap));
}

Index lanczos_workspace_doubles(int q, Index n, Index p) {
  const Index m = lanczos_basis_size(q, n, p);
  return m * (n + p) + 3 * m * m + n + p;
}

Vector ritz_residuals(const BidiagonalSystem& sys, const Vector& vtilde_last_row, int q) {
  check(vtilde_last_row.size() >= q, "ritz_residuals: need at least q last-row entries");
  const double beta_m = sys.r.norm();
  return beta_m * vtilde_last_row.head(q).cwiseAbs();
}

SingularTriplets partial_svd(const LinearOperator& op, int q, const SvdConfig& cfg) {
  const Index n = op.rows();
  const Index p = op.cols();
  check(q >= 1, "partial_svd: q must be >= 1");
  check(q <= std::min(n, p) - 1,
        "partial_svd: q must be <= min(n,p)-1, got q=" + std::to_string(q) + " for " +
            std::to_string(n) + "x" + std::to_string(p));
  check(cfg.delta > 0.0, "partial_svd: delta must be positive");

  const int m = lanczos_basis_size(q, n, p);
  Rng rng(derive_stream(cfg.seed, 0x5fadULL));
  SweepContext ctx{op, rng};

  BidiagonalSystem sys;
  sys.m = m;
  sys.f.resize(n, m);
  sys.g.resize(p, m);
  sys.b = Matrix::Zero(m, m);

  SingularTriplets out;
  double h1 = 0.0;            // running largest-singular-value estimate
  double max_defect = 0.0;

  // Scale reference for breakdown detection before any singular value exists.
  auto breakdown_tol = [&] { return 1e3 * kEps * std::max(h1, 1e-300); };

  Vector f1(n);
  for (Index i = 0; i < n; ++i) f1[i] = rng.normal();
  f1.normalize();

  Eigen::JacobiSVD<Matrix> small_svd;
  Vector h;           // singular values of B
  Matrix vtilde;      // left singular vectors of B  (right Ritz: v_j = G vtilde_j)
  Matrix utilde;      // right singular vectors of B (left Ritz:  u_j = F utilde_j)

  int jstart = 0;  // first unbuilt column of the current sweep
  bool restarted = false;

  for (int restart = 0;; ++restart) {
    if (!restarted) {
      // First sweep: f_1 random; g_1 = W'f_1 / alpha_1.
      sys.f.col(0) = f1;
      Vector g = ctx.apply_adjoint(f1);
      double alpha = g.norm();
      if (alpha <= breakdown_tol()) {
        g = ctx.random_orthogonal(sys.g, 0, p);
        alpha = 0.0;
      } else {
        g /= alpha;
      }
      sys.g.col(0) = g;
      sys.b(0, 0) = alpha;
      h1 = std::max(h1, alpha);
      jstart = 0;
    }

    // Build columns; within a sweep column j couples (f_j, g_j) through
    // r_j = W g_j - alpha_j f_j and g_{j+1} = W' f_{j+1} - beta_j g_j, both
    // fully reorthogonalized.
    for (int j = jstart; j < m; ++j) {
      Vector r = ctx.apply(sys.g.col(j));
      r.noalias() -= sys.b(j, j) * sys.f.col(j);
      reorthogonalize(sys.f, j + 1, r);
      double beta = r.norm();
      if (j == m - 1) {
        sys.r = r;  // residual r_m, ||r_m|| = beta_m
        break;
      }
      if (beta <= breakdown_tol()) {
        sys.f.col(j + 1) = ctx.random_orthogonal(sys.f, j + 1, n);
        sys.b(j, j + 1) = 0.0;
      } else {
        sys.f.col(j + 1) = r / beta;
        sys.b(j, j + 1) = beta;
        h1 = std::max(h1, beta);
      }

      Vector g = ctx.apply_adjoint(sys.f.col(j + 1));
      g.noalias() -= sys.b(j, j + 1) * sys.g.col(j);
      reorthogonalize(sys.g, j + 1, g);
      double alpha = g.norm();
      if (alpha <= breakdown_tol()) {
        sys.g.col(j + 1) = ctx.random_orthogonal(sys.g, j + 1, p);
        sys.b(j + 1, j + 1) = 0.0;
      } else {
        sys.g.col(j + 1) = g / alpha;
        sys.b(j + 1, j + 1) = alpha;
        h1 = std::max(h1, alpha);
      }
    }

    max_defect = std::max({max_defect, ortho_defect(sys.f), ortho_defect(sys.g)});

    small_svd.compute(sys.b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    h = small_svd.singularValues();
    vtilde = small_svd.matrixU();
    utilde = small_svd.matrixV();
    h1 = std::max(h1, h[0]);

    const Vector res = ritz_residuals(sys, vtilde.row(m - 1).transpose(), q);
    const bool converged = (res.array() <= std::max(h[0], 1e-300) * cfg.delta).all();

    if (converged || restart >= cfg.max_restarts) {
      out.values = h.head(q);
      out.right_vectors.noalias() = sys.g * vtilde.leftCols(q);
      out.left_vectors.noalias() = sys.f * utilde.leftCols(q);
      out.residuals = res;
      out.restarts = restart;
      out.converged = converged;
      out.matvecs = ctx.matvecs;
      out.ortho_defect = max_defect;
      // Sign convention: largest-magnitude entry of each right vector
      // positive; the paired left vector flips with it.
      for (int j = 0; j < q; ++j) {
        Index imax;
        out.right_vectors.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.right_vectors(imax, j) < 0.0) {
          out.right_vectors.col(j) = -out.right_vectors.col(j);
          out.left_vectors.col(j) = -out.left_vectors.col(j);
        }
      }
      return out;
    }

    // Implicit restart: keep the q Ritz pairs, append the residual direction.
    const double beta_m = sys.r.norm();
    Vector f_next;
    if (beta_m <= breakdown_tol()) {
      f_next = ctx.random_orthogonal(sys.f, m, n);
    } else {
      // r_m is orthogonal to all of F in exact arithmetic; it is cleaned
      // against the kept Ritz vectors below.
      f_next = sys.r / beta_m;
    }
    Matrix new_f(n, m), new_g(p, m);
    new_f.leftCols(q).noalias() = sys.f * utilde.leftCols(q);
    new_g.leftCols(q).noalias() = sys.g * vtilde.leftCols(q);

    Vector rho = beta_m * vtilde.row(m - 1).head(q).transpose();

    sys.b.setZero();
    for (int j = 0; j < q; ++j) {
      sys.b(j, j) = h[j];
      sys.b(j, q) = rho[j];
    }

    reorthogonalize(new_f, q, f_next);
    const double fnorm = f_next.norm();
    f_next = fnorm > 1e-8 ? Vector(f_next / fnorm) : ctx.random_orthogonal(new_f, q, n);
    new_f.col(q) = f_next;

    // r_q = W' f_{m+1} - sum_j rho_j v_j, normalized into g_{q+1}.
    Vector rq = ctx.apply_adjoint(f_next);
    rq.noalias() -= new_g.leftCols(q) * rho;
    reorthogonalize(new_g, q, rq);
    double alpha = rq.norm();
    if (alpha <= breakdown_tol()) {
      new_g.col(q) = ctx.random_orthogonal(new_g, q, p);
      sys.b(q, q) = 0.0;
    } else {
      new_g.col(q) = rq / alpha;
      sys.b(q, q) = alpha;
    }

    sys.f = std::move(new_f);
    sys.g = std::move(new_g);

    // gamma = f_{m+1}' W g_{q+1}; r_{q+1} = W g_{q+1} - gamma f_{m+1},
    // reorthogonalized against the whole current F basis.
    Vector wg = ctx.apply(sys.g.col(q));
    reorthogonalize(sys.f, q + 1, wg);
    double beta = wg.norm();
    if (q + 1 < m) {
      if (beta <= breakdown_tol()) {
        sys.f.col(q + 1) = ctx.random_orthogonal(sys.f, q + 1, n);
        sys.b(q, q + 1) = 0.0;
      } else {
        sys.f.col(q + 1) = wg / beta;
        sys.b(q, q + 1) = beta;
      }
      // Continue the sweep with g_{q+2}: the g-side step of column q+1.
      Vector g = ctx.apply_adjoint(sys.f.col(q + 1));
      reorthogonalize(sys.g, q + 1, g);
      alpha = g.norm();
      if (alpha <= breakdown_tol()) {
        sys.g.col(q + 1) = ctx.random_orthogonal(sys.g, q + 1, p);
        sys.b(q + 1, q + 1) = 0.0;
      } else {
        sys.g.col(q + 1) = g / alpha;
        sys.b(q + 1, q + 1) = alpha;
      }
      jstart = q + 1;
    } else {
      sys.r = wg;
      jstart = m;  // basis already full; next sweep only re-extracts
    }
    restarted = true;
  }
}

}  // namespace fad
