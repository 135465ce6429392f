#pragma once

#include <cmath>
#include <string>

#include "fad/types.hpp"

namespace fad {

// Raw matrix file I/O shared by DataSet and the psvd tool. Binary format:
// magic "FADM", u32 version 1, u64 n, u64 p, then n*p little-endian doubles
// in row-major order. CSV is comma-separated with an optional header row.
RowMatrix read_matrix_csv(const std::string& path, bool header);
RowMatrix read_matrix_binary(const std::string& path);
void write_matrix_binary(const std::string& path, const RowMatrix& values);

// The n x p observation matrix with cached column means and standard
// deviations (divisor n, matching S = (Y - 1*mean')' (Y - 1*mean') / n).
// This is the only large object the engine ever holds; everything downstream
// works through the centered products below and never forms S.
class DataSet {
 public:
  // Validates finiteness and nonzero column variance, then caches the stats.
  static DataSet from_values(RowMatrix values);
  // column_names is optional and only used to name offending columns in
  // diagnostics.
  static DataSet read_csv(const std::string& path, bool header);
  static DataSet read_binary(const std::string& path);
  void write_binary(const std::string& path) const;
  void write_csv(const std::string& path) const;

  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }
  const RowMatrix& values() const { return values_; }
  const Vector& col_mean() const { return mean_; }
  const Vector& col_sd() const { return sd_; }
  // n-1 divisor variant, for reporting only; the likelihood always uses
  // divisor n.
  Vector col_sd_unbiased() const {
    return sd_ * std::sqrt(double(n()) / double(n() - 1));
  }

  // diag(S) on the requested scale: all ones for correlation, the divisor-n
  // column variances for covariance.
  Vector diag_s(ScaleMode mode) const;

  // out = (Y - 1*mean') * (scale .* x), for a per-column scale vector.
  // Centering is the implicit rank-one correction; Y is streamed once.
  void centered_mult(const Vector& scale, const Vector& x, Vector& out) const;
  // out = scale .* ((Y - 1*mean')' * u)
  void centered_tmult(const Vector& scale, const Vector& u, Vector& out) const;
  // Multi-column versions (k right-hand sides at once) used by the EM sweep.
  void centered_mult(const Vector& scale, const Matrix& x, Matrix& out) const;
  void centered_tmult(const Vector& scale, const Matrix& u, Matrix& out) const;

  // Per-matvec scratch requirement in doubles; O(n+p) by construction.
  Index matvec_workspace_doubles() const { return n() + p(); }

 private:
  DataSet() = default;
  RowMatrix values_;
  Vector mean_;
  Vector sd_;
};

}  // namespace fad
