#include <doctest.h>

#include <cmath>

#include "fad/lbfgsb.hpp"

using namespace fad;

TEST_CASE("concave quadratic: interior optimum") {
  const Index p = 20;
  const Vector center = Vector::Constant(p, 0.5);
  int calls = 0;
  Objective obj = [&](const Vector& x, Vector& g) {
    ++calls;
    g = -2.0 * (x - center);
    return -(x - center).squaredNorm();
  };
  auto [x, trace] = maximize(obj, Vector::Constant(p, 0.9), Vector::Zero(p), Vector::Ones(p));
  CHECK(trace.status == OptStatus::converged);
  CHECK(trace.iterations < 30);
  CHECK((x - center).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(trace.objective_calls == calls);
  CHECK(trace.objective_calls == trace.ls_trials + 1);  // fused: one call per trial
}

TEST_CASE("concave quadratic: optimum beyond the box sticks to the bound") {
  const Index p = 6;
  const Vector center = Vector::Constant(p, 1.2);
  Vector lo = Vector::Zero(p), hi = Vector::Ones(p);
  Objective obj = [&](const Vector& x, Vector& g) {
    g = -2.0 * (x - center);
    return -(x - center).squaredNorm();
  };
  auto [x, trace] = maximize(obj, Vector::Constant(p, 0.5), lo, hi);
  CHECK(trace.status == OptStatus::converged);
  CHECK((x.array() == 1.0).all());  // exactly on the bound, by projection
}

TEST_CASE("iterates remain inside the box exactly") {
  const Index p = 4;
  Vector lo = Vector::Zero(p), hi = Vector::Ones(p);
  const Vector center = Vector::Constant(p, 1.5);
  Objective obj = [&](const Vector& x, Vector& g) {
    CHECK((x.array() >= lo.array()).all());
    CHECK((x.array() <= hi.array()).all());
    g = -2.0 * (x - center);
    return -(x - center).squaredNorm();
  };
  auto [x, trace] = maximize(obj, Vector::Constant(p, 0.1), lo, hi);
  CHECK((x.array() >= lo.array()).all());
  CHECK((x.array() <= hi.array()).all());
}

TEST_CASE("negated Rosenbrock reaches the analytic optimum (1,1)") {
  Objective obj = [](const Vector& x, Vector& g) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    g.resize(2);
    g[0] = -(-400.0 * a * x[0] - 2.0 * b);
    g[1] = -(200.0 * a);
    return -(100.0 * a * a + b * b);
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  LbfgsbConfig cfg;
  cfg.g_tol = 1e-10;
  auto [x, trace] =
      maximize(obj, x0, Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), cfg);
  CHECK(std::abs(x[0] - 1.0) < 1e-6);
  CHECK(std::abs(x[1] - 1.0) < 1e-6);
  CHECK(trace.f_best > -1e-12);
}

TEST_CASE("monotone best value and fused-call accounting") {
  const Index p = 5;
  Objective obj = [&](const Vector& x, Vector& g) {
    g = -4.0 * x.array().cube().matrix() - x;
    return -(x.array().square().square().sum() + 0.5 * x.squaredNorm());
  };
  auto [x, trace] = maximize(obj, Vector::Constant(p, 0.8),
                             Vector::Constant(p, -1.0), Vector::Ones(p));
  CHECK(trace.status == OptStatus::converged);
  const double f0 = -(std::pow(0.8, 4) + 0.5 * 0.8 * 0.8) * p;
  CHECK(trace.f_best >= f0);  // never worse than the start
  CHECK(trace.objective_calls == trace.ls_trials + 1);
}

TEST_CASE("line-search failure carries the best iterate") {
  // A gradient that promises ascent the flat objective never delivers: every
  // Armijo trial fails, the history is empty, and the best iterate (x0)
  // comes back with the failure status.
  const Index p = 3;
  Objective obj = [](const Vector& x, Vector& g) {
    g = Vector::Constant(x.size(), 1e8);
    return 0.0;
  };
  auto [x, trace] = maximize(obj, Vector::Constant(p, 0.5), Vector::Zero(p), Vector::Ones(p));
  CHECK(trace.status == OptStatus::line_search_failed);
  CHECK((x.array() == 0.5).all());
  CHECK(trace.ls_trials >= 40);
}

TEST_CASE("NaN objective raises with the iterate snapshot") {
  Objective obj = [](const Vector& x, Vector& g) {
    g = Vector::Zero(x.size());
    return std::nan("");
  };
  CHECK_THROWS_WITH_AS(
      maximize(obj, Vector::Constant(2, 0.5), Vector::Zero(2), Vector::Ones(2)),
      doctest::Contains("NaN"), FadError);
}

TEST_CASE("max_iter is respected") {
  // Rosenbrock needs far more than three iterations from the classic start.
  Objective obj = [](const Vector& x, Vector& g) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    g.resize(2);
    g[0] = 400.0 * a * x[0] + 2.0 * b;
    g[1] = -200.0 * a;
    return -(100.0 * a * a + b * b);
  };
  LbfgsbConfig cfg;
  cfg.max_iter = 3;
  Vector x0(2);
  x0 << -1.2, 1.0;
  auto [x, trace] = maximize(obj, x0, Vector::Constant(2, -2.0), Vector::Constant(2, 2.0), cfg);
  CHECK(trace.status == OptStatus::max_iter);
  CHECK(trace.iterations == 3);
}

TEST_CASE("bad inputs rejected") {
  Objective obj = [](const Vector& x, Vector& g) {
    g = -x;
    return -0.5 * x.squaredNorm();
  };
  CHECK_THROWS_AS(maximize(obj, Vector::Ones(2), Vector::Zero(2), Vector::Zero(2)), FadError);
  CHECK_THROWS_AS(maximize(obj, Vector::Ones(2), Vector::Zero(2), Vector::Ones(2)), FadError);
  CHECK_THROWS_AS(maximize(obj, Vector::Zero(3), Vector::Zero(2), Vector::Ones(2)), FadError);
}
