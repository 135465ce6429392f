#pragma once

#include <cstdint>

#include "fad/operators.hpp"
#include "fad/types.hpp"

namespace fad {

struct SvdConfig {
  double delta = 1e-9;     // stopping tolerance on beta_m |vtilde_{j,m}| <= h_1 delta
  int max_restarts = 1000;
  std::uint64_t seed = 0;  // seeds the random start vector
};

// Lanczos bidiagonalization state. B is upper bidiagonal on the first sweep
// (diagonal alpha, superdiagonal beta); after a restart it is bordered:
// B(j,j) = h_j and B(j,q) = rho_j for j < q, with the trailing block again
// bidiagonal. The recurrences maintained are W' F = G B and
// W G = F B' + r e_m'.
struct BidiagonalSystem {
  Matrix b;  // m x m
  Matrix f;  // n x m, orthonormal left basis
  Matrix g;  // p x m, orthonormal right basis
  Vector r;  // length-n residual, norm beta_m
  int m = 0;
};

struct SingularTriplets {
  Vector values;         // q, nonincreasing
  Matrix right_vectors;  // p x q
  Matrix left_vectors;   // n x q
  Vector residuals;      // q: beta_m |vtilde_{j,m}| at exit
  int restarts = 0;
  bool converged = false;
  long matvecs = 0;
  double ortho_defect = 0.0;  // max over sweeps of ||F'F - I||_max, ||G'G - I||_max
};

// beta_m |vtilde_{j,m}| for j < q: the residual norms of W v_j = h_j u_j +
// vtilde_{j,m} r_m tested against h_1 * delta.
Vector ritz_residuals(const BidiagonalSystem& sys, const Vector& vtilde_last_row, int q);

// q largest singular values and vectors of op via Lanczos bidiagonalization
// with full reorthogonalization and implicit restart. Requires
// 1 <= q <= min(rows, cols) - 1. Deterministic for a fixed seed. Each right
// vector is flipped so its largest-magnitude entry is positive.
SingularTriplets partial_svd(const LinearOperator& op, int q, const SvdConfig& cfg = {});

// Basis size used internally: min(max(2q+1, 20), min(n,p)).
int lanczos_basis_size(int q, Index n, Index p);

// Workspace bound in doubles (bases + small matrices), O(m(n+p)).
Index lanczos_workspace_doubles(int q, Index n, Index p);

}  // namespace fad
