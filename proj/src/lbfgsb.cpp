#include "fad/lbfgsb.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace fad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Vector project(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct Pair {
  Vector s;  // iterate difference
  Vector y;  // gradient difference (of the minimized objective)
  double rho;
};

std::string snapshot(const Vector& x) {
  std::ostringstream os;
  os << "[";
  const Index k = std::min<Index>(x.size(), 8);
  for (Index i = 0; i < k; ++i) os << (i ? ", " : "") << x[i];
  if (x.size() > k) os << ", ...";
  os << "]";
  return os.str();
}

}  // namespace

std::pair<Vector, FitTrace> maximize(const Objective& objective, const Vector& x0,
                                     const Vector& lo, const Vector& hi,
                                     const LbfgsbConfig& cfg) {
  const Index dim = x0.size();
  check(lo.size() == dim && hi.size() == dim, "maximize: bound dimensions");
  check((lo.array() < hi.array()).all(), "maximize: need lo < hi componentwise");
  check((x0.array() > lo.array()).all() && (x0.array() < hi.array()).all(),
        "maximize: x0 must lie strictly inside the bounds");

  // Internally minimize F = -f; all bookkeeping below is in F terms.
  FitTrace trace;
  Vector x = x0;
  auto eval = [&](const Vector& pt, Vector& grad_out) {
    const double f = objective(pt, grad_out);
    ++trace.objective_calls;
    if (std::isnan(f) || !grad_out.allFinite())
      throw FadError("objective returned NaN at x = " + snapshot(pt));
    grad_out = -grad_out;
    return -f;
  };

  Vector g(dim);
  double f_cur = eval(x, g);

  Vector x_best = x;
  Vector g_best = g;
  double f_min = f_cur;  // smallest F seen at an accepted iterate

  std::deque<Pair> history;
  const double act_tol = 1e-12;

  auto proj_grad_norm = [&](const Vector& xx, const Vector& gg) {
    // ||P(x - g) - x||_inf: zero exactly when no feasible descent remains.
    return (project(xx - gg, lo, hi) - xx).lpNorm<Eigen::Infinity>();
  };

  auto finish = [&](OptStatus status, const Vector& x_ret, const Vector& g_ret) {
    trace.status = status;
    trace.f_best = -f_min;
    trace.proj_grad_norm = proj_grad_norm(x_ret, g_ret);
    return std::pair<Vector, FitTrace>{x_ret, trace};
  };

  double rel_increase = 0.0;  // of the last accepted step, in f terms

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    trace.iterations = iter;

    if (proj_grad_norm(x, g) < cfg.g_tol && rel_increase < cfg.f_rtol)
      return finish(OptStatus::converged, x, g);

    // Active set from the projected gradient: a bound is binding when the
    // iterate sits on it and the gradient pushes outward.
    Eigen::Array<bool, Eigen::Dynamic, 1> active(dim);
    for (Index i = 0; i < dim; ++i)
      active[i] = (x[i] <= lo[i] + act_tol && g[i] > 0.0) ||
                  (x[i] >= hi[i] - act_tol && g[i] < 0.0);

    Vector gm = g;
    for (Index i = 0; i < dim; ++i)
      if (active[i]) gm[i] = 0.0;

    // Two-loop recursion on the free subspace.
    Vector d = -gm;
    if (!history.empty()) {
      Vector alpha(history.size());
      for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
        alpha[k] = history[k].rho * history[k].s.dot(d);
        d -= alpha[k] * history[k].y;
      }
      const auto& last = history.back();
      d *= last.s.dot(last.y) / last.y.dot(last.y);
      for (std::size_t k = 0; k < history.size(); ++k) {
        const double beta = history[k].rho * history[k].y.dot(d);
        d += (alpha[k] - beta) * history[k].s;
      }
      for (Index i = 0; i < dim; ++i)
        if (active[i]) d[i] = 0.0;
      if (d.dot(g) >= 0.0) d = -gm;  // not a descent direction; fall back
    }

    double step = 1.0;
    if (history.empty()) {
      const double dinf = d.lpNorm<Eigen::Infinity>();
      if (dinf > 1.0) step = 1.0 / dinf;
    }

    // Backtracking Armijo with an absolute slack at the value's rounding
    // floor: once the objective is numerically flat the analytic gradient is
    // still accurate, and gradient-polishing steps must not be rejected over
    // summation noise in the value.
    const double noise_floor = 256.0 * kEps * (1.0 + std::abs(f_cur));
    bool accepted = false;
    Vector x_new, g_new(dim);
    double f_new = f_cur;
    auto line_search = [&](const Vector& dir, double step0) {
      double t = step0;
      for (int trial = 0; trial < cfg.max_ls_trials; ++trial) {
        x_new = project(x + t * dir, lo, hi);
        const Vector dx = x_new - x;
        if (dx.lpNorm<Eigen::Infinity>() == 0.0) return;  // blocked, not a trial
        ++trace.ls_trials;
        f_new = eval(x_new, g_new);
        if (f_new <= f_cur + cfg.armijo_c1 * g.dot(dx) + noise_floor) {
          accepted = true;
          return;
        }
        t *= 0.5;
      }
    };
    line_search(d, step);
    if (!accepted && !history.empty()) {
      // Curvature model is stale (typical near clustered Ritz values);
      // restart from steepest ascent before giving up.
      history.clear();
      line_search(gm, 1.0 / std::max(1.0, gm.lpNorm<Eigen::Infinity>()));
    }

    if (!accepted) {
      if (proj_grad_norm(x, g) < cfg.g_tol) return finish(OptStatus::converged, x, g);
      // Carry the best iterate out of the failed search.
      return finish(OptStatus::line_search_failed, x_best, g_best);
    }

    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > kEps * s.norm() * y.norm()) {
      history.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }

    rel_increase = (f_cur - f_new) / std::max(1.0, std::abs(f_new));
    x = std::move(x_new);
    f_cur = f_new;
    g = g_new;
    if (f_cur <= f_min) {
      f_min = f_cur;
      x_best = x;
      g_best = g;
    }

    if (rel_increase < cfg.f_rtol && proj_grad_norm(x, g) < cfg.g_tol)
      return finish(OptStatus::converged, x, g);
  }

  return finish(OptStatus::max_iter, x_best, g_best);
}

}  // namespace fad
