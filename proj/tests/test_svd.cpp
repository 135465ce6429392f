#include <doctest.h>

#include <Eigen/SVD>

#include "fad/svd.hpp"
#include "fad/rng.hpp"
#include "oracles.hpp"

using namespace fad;

namespace {

Matrix random_matrix(Rng& rng, Index n, Index p) {
  Matrix a(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  return a;
}

Matrix with_spectrum(Rng& rng, Index n, Index p, const Vector& sigma) {
  const Index k = sigma.size();
  Matrix u = oracle::random_orthogonal(rng, n).leftCols(k);
  Matrix v = oracle::random_orthogonal(rng, p).leftCols(k);
  return u * sigma.asDiagonal() * v.transpose();
}

}  // namespace

TEST_CASE("diagonal operator: exact values and axis vectors") {
  Matrix a = Matrix::Zero(5, 5);
  a.diagonal() << 5, 4, 3, 2, 1;
  DenseOperator op(a);
  SingularTriplets t = partial_svd(op, 2, {});
  REQUIRE(t.converged);
  CHECK(t.values[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(t.values[1] == doctest::Approx(4.0).epsilon(1e-12));
  // sign convention makes the dominant entry positive, so exactly e_1, e_2
  Vector e1 = Vector::Zero(5), e2 = Vector::Zero(5);
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK((t.right_vectors.col(0) - e1).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((t.right_vectors.col(1) - e2).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("full-dimension sweep terminates with zero residuals") {
  // m = min(max(2q+1,20), 5) = 5: the Krylov space is complete after one
  // sweep, so every Ritz residual vanishes.
  Matrix a = Matrix::Zero(5, 5);
  a.diagonal() << 5, 4, 3, 2, 1;
  DenseOperator op(a);
  CHECK(lanczos_basis_size(2, 5, 5) == 5);
  SingularTriplets t = partial_svd(op, 2, {});
  REQUIRE(t.converged);
  CHECK(t.restarts == 0);
  CHECK(t.residuals.lpNorm<Eigen::Infinity>() < 1e-12 * t.values[0]);
}

TEST_CASE("random 30x50: top-3 values match the dense SVD") {
  Rng rng(2024);
  Matrix a = random_matrix(rng, 30, 50);
  DenseOperator op(a);
  SingularTriplets t = partial_svd(op, 3, {});
  REQUIRE(t.converged);
  Eigen::BDCSVD<Matrix> dense(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(t.values[j] - dense.singularValues()[j]) <
          1e-8 * dense.singularValues()[0]);
}

TEST_CASE("exact rank deficiency: third value vanishes") {
  Rng rng(5);
  Matrix q1 = oracle::random_orthogonal(rng, 12);
  Matrix q2 = oracle::random_orthogonal(rng, 9);
  // a b' + c d' with orthonormal pairs: rank exactly 2
  Matrix a = 3.0 * q1.col(0) * q2.col(0).transpose() + 1.5 * q1.col(1) * q2.col(1).transpose();
  DenseOperator op(a);
  SingularTriplets t = partial_svd(op, 3, {});
  REQUIRE(t.converged);
  CHECK(t.values[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(t.values[1] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(t.values[2] <= 1e-8 * t.values[0]);
}

TEST_CASE("ritz_residuals formula") {
  BidiagonalSystem sys;
  sys.m = 4;
  sys.r = Vector::Zero(6);
  sys.r[0] = 0.5;  // beta_m = 0.5
  Vector last_row(4);
  last_row << 0.1, -0.2, 0.0, 0.4;

  SUBCASE("zero last row means already converged") {
    const Vector res = ritz_residuals(sys, Vector::Zero(4), 3);
    CHECK(res.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("beta_m |vtilde_{j,m}|") {
    const Vector res = ritz_residuals(sys, last_row, 3);
    CHECK(res[0] == doctest::Approx(0.05));
    CHECK(res[1] == doctest::Approx(0.10));
    CHECK(res[2] == doctest::Approx(0.0));
  }
}

TEST_CASE("reported residual equals ||W v_j - h_j u_j||") {
  Rng rng(31);
  Matrix a = random_matrix(rng, 40, 25);
  DenseOperator op(a);
  SvdConfig cfg;
  cfg.delta = 1e-6;  // leave visible residuals
  SingularTriplets t = partial_svd(op, 2, cfg);
  for (int j = 0; j < 2; ++j) {
    const double direct = (a * t.right_vectors.col(j) - t.values[j] * t.left_vectors.col(j)).norm();
    CHECK(std::abs(direct - t.residuals[j]) < 1e-10 * (1.0 + t.values[0]));
  }
}

TEST_CASE("property: values and subspaces match dense up to 60x60") {
  Rng rng(1234);
  int clustered_cases = 0, deficient_cases = 0;
  for (int inst = 0; inst < 40; ++inst) {
    const Index n = 5 + Index(rng.uniform(0, 56));
    const Index p = 5 + Index(rng.uniform(0, 56));
    const int q = 1 + int(rng.uniform(0, std::min<Index>(4, std::min(n, p) - 1)));
    Matrix a;
    const double style = rng.uniform01();
    if (style < 0.3) {
      // clustered spectrum
      const Index k = std::min(n, p);
      Vector sigma(k);
      for (Index i = 0; i < k; ++i) sigma[i] = 2.0 + 1e-7 * double(k - i) + 0.5 * (i >= k / 2);
      std::sort(sigma.data(), sigma.data() + k, std::greater<>());
      a = with_spectrum(rng, n, p, sigma);
      ++clustered_cases;
    } else if (style < 0.55) {
      // rank deficient
      const Index r = std::max<Index>(1, q - 1);
      a = random_matrix(rng, n, r) * random_matrix(rng, r, p);
      ++deficient_cases;
    } else {
      a = random_matrix(rng, n, p);
    }
    DenseOperator op(a);
    SvdConfig cfg;
    cfg.seed = 1000 + inst;
    SingularTriplets t = partial_svd(op, q, cfg);
    REQUIRE(t.converged);
    CHECK(t.ortho_defect < 1e-10);

    Eigen::BDCSVD<Matrix> dense(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double h1 = std::max(dense.singularValues()[0], 1e-30);
    for (int j = 0; j < q; ++j) {
      CHECK(std::abs(t.values[j] - dense.singularValues()[j]) < 1e-8 * h1);
      const double gap_lo = j + 1 <= dense.singularValues().size() - 1
                                ? dense.singularValues()[j] - dense.singularValues()[j + 1]
                                : h1;
      const double gap_hi = j > 0 ? dense.singularValues()[j - 1] - dense.singularValues()[j] : h1;
      if (std::min(gap_lo, gap_hi) > 1e-6 * h1 && dense.singularValues()[j] > 1e-6 * h1) {
        const double align = std::abs(t.right_vectors.col(j).dot(dense.matrixV().col(j)));
        CHECK(align > 1.0 - 1e-6);
      }
    }
  }
  CHECK(clustered_cases > 0);
  CHECK(deficient_cases > 0);
}

TEST_CASE("restart path engages on a flat spectrum and stays accurate") {
  Rng rng(8);
  const Index n = 120, p = 100;
  Vector sigma(p);
  for (Index i = 0; i < p; ++i) sigma[i] = 1.0 + 0.01 * double(p - i) / double(p);
  Matrix a = with_spectrum(rng, n, p, sigma);
  DenseOperator op(a);
  SvdConfig cfg;
  cfg.delta = 1e-10;
  SingularTriplets t = partial_svd(op, 2, cfg);
  REQUIRE(t.converged);
  CHECK(t.restarts >= 1);
  Eigen::BDCSVD<Matrix> dense(a);
  CHECK(std::abs(t.values[0] - dense.singularValues()[0]) < 1e-8 * dense.singularValues()[0]);
  CHECK(std::abs(t.values[1] - dense.singularValues()[1]) < 1e-8 * dense.singularValues()[0]);
}

TEST_CASE("deterministic for a fixed seed") {
  Rng rng(55);
  Matrix a = random_matrix(rng, 33, 28);
  DenseOperator op(a);
  SvdConfig cfg;
  cfg.seed = 99;
  SingularTriplets t1 = partial_svd(op, 3, cfg);
  SingularTriplets t2 = partial_svd(op, 3, cfg);
  CHECK(t1.values == t2.values);
  CHECK(t1.right_vectors == t2.right_vectors);
  CHECK(t1.matvecs == t2.matvecs);

  cfg.seed = 100;  // different start vector, same converged triplets
  SingularTriplets t3 = partial_svd(op, 3, cfg);
  CHECK((t1.values - t3.values).lpNorm<Eigen::Infinity>() < 1e-9 * t1.values[0]);
}

TEST_CASE("workspace bound is O(m(n+p))") {
  const int q = 3;
  const Index n = 200, p = 1000;
  const Index m = lanczos_basis_size(q, n, p);
  CHECK(m == 20);
  CHECK(lanczos_workspace_doubles(q, n, p) <= m * (n + p) + 3 * m * m + n + p);
}

TEST_CASE("preconditions rejected") {
  Matrix a = Matrix::Identity(4, 4);
  DenseOperator op(a);
  CHECK_THROWS_AS(partial_svd(op, 0, {}), FadError);
  CHECK_THROWS_AS(partial_svd(op, 4, {}), FadError);  // q > min(n,p)-1
  SvdConfig bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(partial_svd(op, 1, bad), FadError);
}

TEST_CASE("zero operator converges to zero triplets") {
  Matrix a = Matrix::Zero(8, 6);
  DenseOperator op(a);
  SingularTriplets t = partial_svd(op, 2, {});
  REQUIRE(t.converged);
  CHECK(t.values.lpNorm<Eigen::Infinity>() == 0.0);
}
