#include <doctest.h>

#include "fad/operators.hpp"
#include "fad/rng.hpp"
#include "oracles.hpp"

using namespace fad;

namespace {

Vector apply_dense(const Matrix& w, const Vector& v) { return w * v; }

}  // namespace

TEST_CASE("w_times of the zero vector is zero") {
  Rng rng(1);
  DataSet d = oracle::random_dataset(rng, 6, 4);
  ImplicitW w(d, Vector::Ones(4), ScaleMode::correlation);
  Vector out;
  w.apply(Vector::Zero(4), out);
  CHECK(out.norm() == 0.0);
  w.apply_adjoint(Vector::Zero(6), out);
  CHECK(out.norm() == 0.0);
}

TEST_CASE("integer example matches the explicit column") {
  RowMatrix y(4, 3);
  y << 1, 2, 3,
       4, 6, 5,
       7, 8, 9,
       2, 4, 8;
  DataSet d = DataSet::from_values(y);
  ImplicitW w(d, Vector::Ones(3), ScaleMode::covariance);  // psi = I, raw scale
  const Matrix wd = oracle::dense_w(d, Vector::Ones(3), ScaleMode::covariance);
  for (Index j = 0; j < 3; ++j) {
    Vector e = Vector::Zero(3);
    e[j] = 1.0;
    Vector out;
    w.apply(e, out);
    CHECK((out - wd.col(j)).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("matvec and adjoint match the dense formula") {
  Rng rng(42);
  DataSet d = oracle::random_dataset(rng, 10, 7);
  for (ScaleMode mode : {ScaleMode::correlation, ScaleMode::covariance}) {
    const Vector psi = oracle::random_psi(rng, 7);
    ImplicitW w(d, psi, mode);
    const Matrix wd = oracle::dense_w(d, psi, mode);
    for (int rep = 0; rep < 20; ++rep) {
      Vector v(7), u(10);
      for (Index i = 0; i < 7; ++i) v[i] = rng.normal();
      for (Index i = 0; i < 10; ++i) u[i] = rng.normal();
      Vector wv, wtu;
      w.apply(v, wv);
      w.apply_adjoint(u, wtu);
      CHECK((wv - apply_dense(wd, v)).norm() < 1e-12 * (1.0 + wv.norm()));
      CHECK((wtu - wd.transpose() * u).norm() < 1e-12 * (1.0 + wtu.norm()));
    }
  }
}

TEST_CASE("adjoint identity <u, Wv> = <W'u, v> on 100 random pairs") {
  Rng rng(7);
  DataSet d = oracle::random_dataset(rng, 12, 9);
  const Vector psi = oracle::random_psi(rng, 9);
  ImplicitW w(d, psi, ScaleMode::correlation);
  for (int rep = 0; rep < 100; ++rep) {
    Vector v(9), u(12), wv, wtu;
    for (Index i = 0; i < 9; ++i) v[i] = rng.normal();
    for (Index i = 0; i < 12; ++i) u[i] = rng.normal();
    w.apply(v, wv);
    w.apply_adjoint(u, wtu);
    const double lhs = u.dot(wv);
    const double rhs = wtu.dot(v);
    CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("explicit-column reconstruction equals the dense formula") {
  Rng rng(99);
  const std::pair<Index, Index> shapes[] = {{2, 2}, {5, 3}, {10, 7}, {25, 40}, {100, 100}};
  for (auto [n, p] : shapes) {
    DataSet d = oracle::random_dataset(rng, n, p);
    const Vector psi = oracle::random_psi(rng, p);
    for (ScaleMode mode : {ScaleMode::correlation, ScaleMode::covariance}) {
      ImplicitW w(d, psi, mode);
      const Matrix wd = oracle::dense_w(d, psi, mode);
      Matrix rebuilt(n, p);
      Vector e = Vector::Zero(p), col;
      for (Index j = 0; j < p; ++j) {
        e[j] = 1.0;
        w.apply(e, col);
        rebuilt.col(j) = col;
        e[j] = 0.0;
      }
      CHECK((rebuilt - wd).lpNorm<Eigen::Infinity>() <
            1e-12 * (1.0 + wd.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(11);
  DataSet d = oracle::random_dataset(rng, 6, 4);
  ImplicitW w(d, Vector::Ones(4), ScaleMode::correlation);
  Vector out;
  CHECK_THROWS_AS(w.apply(Vector::Zero(5), out), FadError);
  CHECK_THROWS_AS(w.apply_adjoint(Vector::Zero(4), out), FadError);
  CHECK_THROWS_AS(ImplicitW(d, Vector::Ones(3), ScaleMode::correlation), FadError);
  CHECK_THROWS_AS(ImplicitW(d, -Vector::Ones(4), ScaleMode::correlation), FadError);
}

TEST_CASE("multi-column kernels agree with repeated single matvecs") {
  Rng rng(13);
  DataSet d = oracle::random_dataset(rng, 9, 6);
  const Vector scale = oracle::random_psi(rng, 6, 0.5, 2.0);
  Matrix x(6, 3), u(9, 2);
  for (Index i = 0; i < x.size(); ++i) x(i / 3, i % 3) = rng.normal();
  for (Index i = 0; i < u.size(); ++i) u(i / 2, i % 2) = rng.normal();
  Matrix mx, mu;
  d.centered_mult(scale, x, mx);
  d.centered_tmult(scale, u, mu);
  for (Index k = 0; k < 3; ++k) {
    Vector one;
    d.centered_mult(scale, Vector(x.col(k)), one);
    CHECK((one - mx.col(k)).lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + one.lpNorm<Eigen::Infinity>()));
  }
  for (Index k = 0; k < 2; ++k) {
    Vector one;
    d.centered_tmult(scale, Vector(u.col(k)), one);
    CHECK((one - mu.col(k)).lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + one.lpNorm<Eigen::Infinity>()));
  }
}
