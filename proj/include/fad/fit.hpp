#pragma once

#include "fad/dataset.hpp"
#include "fad/report.hpp"

namespace fad {

// Principal-component start shared by both methods: Lambda0 = V_q diag(h)
// from the partial SVD of the scaled data (psi = 1 operator), and
// psi0 = diag(S) - diag(Lambda0 Lambda0') clamped into the box.
struct Initialization {
  Matrix lambda0;
  Vector psi0;
  long lanczos_calls = 0;
};
Initialization pca_initialization(const DataSet& data, int q, const FitConfig& cfg);

// Profile-likelihood fit: L-BFGS-B over psi with fused value+gradient
// evaluations, then loadings recovered from the final evaluation.
FitReport fit_fad(const DataSet& data, int q, const FitConfig& cfg);

}  // namespace fad
