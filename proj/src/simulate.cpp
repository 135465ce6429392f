#include "fad/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "fad/rng.hpp"

namespace fad {

std::optional<SimConfig> preset_config(const std::string& name) {
  SimConfig cfg;
  if (name == "paper-small") {
    cfg.n = 100; cfg.p = 1000; cfg.q_true = 3; cfg.k_max = 6;
    return cfg;
  }
  if (name == "paper-mid") {
    cfg.n = 225; cfg.p = 3375; cfg.q_true = 5; cfg.k_max = 10;
    return cfg;
  }
  if (name == "high-noise") {
    cfg.n = 200; cfg.p = 1000; cfg.q_true = 3; cfg.k_max = 6;
    cfg.psi_law = PsiLaw::inverse_gamma;
    cfg.ig_variance = 1.0;
    return cfg;
  }
  if (name == "ultra") {
    cfg.n = 160; cfg.p = 24547; cfg.q_true = 2; cfg.k_max = 4;
    return cfg;
  }
  return std::nullopt;
}

std::pair<DataSet, TruthParams> generate(const SimConfig& cfg, int rep) {
  check(cfg.n >= 2 && cfg.p >= 1 && cfg.q_true >= 0, "generate: bad dimensions");
  check(rep >= 0 && rep < std::max(cfg.replicates, rep + 1), "generate: bad replicate");
  Rng rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(rep)));

  const Index n = cfg.n, p = cfg.p;
  const int q = cfg.q_true;

  TruthParams truth;
  truth.psi.resize(p);
  for (Index j = 0; j < p; ++j) {
    truth.psi[j] = cfg.psi_law == PsiLaw::uniform
                       ? rng.uniform(cfg.uniform_lo, cfg.uniform_hi)
                       : rng.inverse_gamma_unit_mean(cfg.ig_variance);
  }
  truth.lambda.resize(p, q);
  for (Index j = 0; j < p; ++j)
    for (int k = 0; k < q; ++k) truth.lambda(j, k) = rng.normal();

  Matrix z(n, q);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k) z(i, k) = rng.normal();

  RowMatrix y(n, p);
  if (q > 0) {
    y.noalias() = z * truth.lambda.transpose();
  } else {
    y.setZero();
  }
  const Vector noise_sd = truth.psi.array().sqrt();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) y(i, j) += noise_sd[j] * rng.normal();

  return {DataSet::from_values(std::move(y)), std::move(truth)};
}

Quartiles quartiles(std::vector<double> v) {
  Quartiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double frac) {
    const double pos = frac * double(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double w = pos - double(i);
    return i + 1 < v.size() ? (1.0 - w) * v[i] + w * v[i + 1] : v[i];
  };
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  return q;
}

ExperimentReport run_experiment(const SimConfig& cfg, const ExperimentOptions& opts,
                                ThreadPool* pool) {
  check(opts.run_fad || opts.run_em, "run_experiment: no method enabled");
  ExperimentReport report;
  report.cfg = cfg;
  report.replicates.resize(cfg.replicates);

  auto run_rep = [&](int rep) {
    ReplicateResult& rr = report.replicates[rep];
    rr.rep = rep;
    try {
      auto [data, truth] = generate(cfg, rep);
      if (opts.run_fad) {
        SelectResult sel = select_q(data, cfg.k_max, Method::fad, opts.fit, pool);
        rr.q_best_fad = sel.q_best;
        rr.fad_errors = truth_errors(sel.reports[sel.q_best - 1], truth);
        rr.fad_reports = std::move(sel.reports);
      }
      if (opts.run_em) {
        SelectResult sel = select_q(data, cfg.k_max, Method::em, opts.fit, pool);
        rr.q_best_em = sel.q_best;
        rr.em_errors = truth_errors(sel.reports[sel.q_best - 1], truth);
        rr.em_reports = std::move(sel.reports);
      }
      if (opts.run_fad && opts.run_em && cfg.q_true >= 1 && cfg.q_true <= cfg.k_max) {
        const FitReport& f = rr.fad_reports[cfg.q_true - 1];
        const FitReport& e = rr.em_reports[cfg.q_true - 1];
        if (f.ok() && e.ok()) {
          rr.cross_at_true_q = compare_fits(f, e, &truth);
          rr.speed_ratio_em_over_fad = rr.cross_at_true_q->speed_ratio;
        }
      }
    } catch (const std::exception& e) {
      rr.error = e.what();
    }
  };

  if (pool) {
    pool->run_indexed(cfg.replicates, run_rep);
  } else {
    for (int r = 0; r < cfg.replicates; ++r) run_rep(r);
  }

  // Aggregates over successful replicates.
  std::vector<double> ratios;
  std::vector<double> dr_f, dg_f, dl_f, dr_e, dg_e, dl_e;
  int hits_fad = 0, hits_em = 0, n_fad = 0, n_em = 0;
  for (const auto& rr : report.replicates) {
    if (!rr.error.empty()) {
      ++report.failures;
      continue;
    }
    if (opts.run_fad) {
      ++n_fad;
      if (rr.q_best_fad == cfg.q_true) ++hits_fad;
      if (rr.fad_errors) {
        dr_f.push_back(rr.fad_errors->d_r);
        dg_f.push_back(rr.fad_errors->d_gamma);
        dl_f.push_back(rr.fad_errors->d_llt);
      }
    }
    if (opts.run_em) {
      ++n_em;
      if (rr.q_best_em == cfg.q_true) ++hits_em;
      if (rr.em_errors) {
        dr_e.push_back(rr.em_errors->d_r);
        dg_e.push_back(rr.em_errors->d_gamma);
        dl_e.push_back(rr.em_errors->d_llt);
      }
    }
    if (rr.speed_ratio_em_over_fad > 0.0) ratios.push_back(rr.speed_ratio_em_over_fad);
  }
  report.bic_hit_rate_fad = n_fad ? double(hits_fad) / n_fad : 0.0;
  report.bic_hit_rate_em = n_em ? double(hits_em) / n_em : 0.0;
  report.speed_ratio = quartiles(ratios);
  report.d_r_fad = quartiles(dr_f);
  report.d_gamma_fad = quartiles(dg_f);
  report.d_llt_fad = quartiles(dl_f);
  report.d_r_em = quartiles(dr_e);
  report.d_gamma_em = quartiles(dg_e);
  report.d_llt_em = quartiles(dl_e);
  return report;
}

}  // namespace fad
