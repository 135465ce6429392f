#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fad/dataset.hpp"
#include "fad/selection.hpp"

namespace fad {

enum class PsiLaw { uniform, inverse_gamma };

inline const char* to_string(PsiLaw law) {
  return law == PsiLaw::uniform ? "uniform" : "inverse-gamma";
}

struct SimConfig {
  Index n = 100;
  Index p = 1000;
  int q_true = 3;
  PsiLaw psi_law = PsiLaw::uniform;
  double uniform_lo = 0.2, uniform_hi = 0.8;
  double ig_variance = 1.0;  // inverse-gamma with mean 1; 0 degenerates to 1
  int replicates = 1;
  std::uint64_t seed = 0;
  int k_max = 6;
};

// Named presets: paper-small (100,1000,3), paper-mid (225,3375,5),
// high-noise (200,1000,3, inverse-gamma), ultra (160,24547,2).
std::optional<SimConfig> preset_config(const std::string& name);

// One replicate: psi and lambda drawn per the configured laws, observations
// sampled through the latent form Y_i = Lambda Z_i + eps_i (never via a p x p
// factorization). Replicate streams are seed-indexed, so replicate r is
// identical whether generated alone or within a batch.
std::pair<DataSet, TruthParams> generate(const SimConfig& cfg, int rep);

struct ReplicateResult {
  int rep = 0;
  std::vector<FitReport> fad_reports;  // k = 1..k_max (empty if fad disabled)
  std::vector<FitReport> em_reports;
  int q_best_fad = 0;
  int q_best_em = 0;
  std::optional<TruthErrors> fad_errors;  // at the selected q
  std::optional<TruthErrors> em_errors;
  std::optional<ComparisonReport> cross_at_true_q;
  double speed_ratio_em_over_fad = 0.0;  // at true q
  std::string error;  // nonempty if the replicate failed
};

struct Quartiles {
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};
Quartiles quartiles(std::vector<double> values);

struct ExperimentOptions {
  bool run_fad = true;
  bool run_em = true;
  FitConfig fit;
};

struct ExperimentReport {
  SimConfig cfg;
  std::vector<ReplicateResult> replicates;
  int failures = 0;
  double bic_hit_rate_fad = 0.0;  // fraction of replicates with q_best == q_true
  double bic_hit_rate_em = 0.0;
  Quartiles speed_ratio;  // EM over FAD wall time at true q
  Quartiles d_r_fad, d_gamma_fad, d_llt_fad;
  Quartiles d_r_em, d_gamma_em, d_llt_em;
};

ExperimentReport run_experiment(const SimConfig& cfg, const ExperimentOptions& opts,
                                ThreadPool* pool = nullptr);

}  // namespace fad
