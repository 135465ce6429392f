#pragma once

#include <cmath>

#include "fad/dataset.hpp"
#include "fad/types.hpp"

namespace fad {

// Minimal matvec interface consumed by the partial SVD.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual void apply(const Vector& x, Vector& out) const = 0;          // out = A x
  virtual void apply_adjoint(const Vector& y, Vector& out) const = 0;  // out = A' y
};

// W = n^{-1/2} (Y - 1*mean') Psi^{-1/2}, held implicitly. In correlation mode
// each column is additionally divided by its sample standard deviation, so
// W'W = Psi^{-1/2} R Psi^{-1/2}. Immutable and safe to share across threads.
class ImplicitW final : public LinearOperator {
 public:
  ImplicitW(const DataSet& data, const Vector& psi, ScaleMode mode)
      : data_(data), inv_sqrt_n_(1.0 / std::sqrt(double(data.n()))) {
    check(psi.size() == data.p(), "ImplicitW: psi has wrong length");
    check((psi.array() > 0.0).all(), "ImplicitW: psi must be positive");
    scale_ = psi.array().rsqrt();
    if (mode == ScaleMode::correlation) scale_.array() /= data.col_sd().array();
  }

  Index rows() const override { return data_.n(); }
  Index cols() const override { return data_.p(); }

  void apply(const Vector& x, Vector& out) const override {
    data_.centered_mult(scale_, x, out);
    out *= inv_sqrt_n_;
  }

  void apply_adjoint(const Vector& y, Vector& out) const override {
    data_.centered_tmult(scale_, y, out);
    out *= inv_sqrt_n_;
  }

  Index workspace_doubles() const { return data_.matvec_workspace_doubles(); }

 private:
  const DataSet& data_;
  Vector scale_;
  double inv_sqrt_n_;
};

// Explicit matrix behind the same interface; used by the psvd tool and tests.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a) : a_(std::move(a)) {}

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }

  void apply(const Vector& x, Vector& out) const override { out.noalias() = a_ * x; }
  void apply_adjoint(const Vector& y, Vector& out) const override {
    out.noalias() = a_.transpose() * y;
  }

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
};

}  // namespace fad
