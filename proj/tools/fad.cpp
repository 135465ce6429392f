// Command-line front end: fit, select, simulate, compare, psvd.

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <thread>

#include "fad/dataset.hpp"
#include "fad/em.hpp"
#include "fad/likelihood.hpp"
#include "fad/fit.hpp"
#include "fad/selection.hpp"
#include "fad/simulate.hpp"
#include "fad/svd.hpp"
#include "fad/thread_pool.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CliOptions {
  std::string input;
  std::string format = "auto";  // csv | binary | auto
  bool csv_header = false;
  std::string scale = "correlation";
  std::string method = "fad";  // fad | em | both
  int q = 0;
  int k_max = 0;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: FAD_THREADS env or hardware concurrency
  bool deterministic = false;
  bool strict = false;
  std::string out;      // JSON report path; stdout if empty
  std::string out_dir;  // parameter CSVs / simulate outputs
  // tolerances
  double psi_lo = 0.005, psi_hi = 1.0;
  int max_iter = 10000;
  double f_rtol = 100.0 * 2.220446049250313e-16;
  double g_tol = 1.4901161193847656e-08;
  int lbfgs_memory = 7;
  double em_rtol = 1e-6;
  int em_max_iter = 5000;
  double delta = 1e-12;       // fit-path Lanczos tolerance
  double psvd_delta = 1e-9;   // standalone psvd default
  int max_restarts = 1000;
  std::string report_scale = "fitted";  // fitted | covariance
  // simulate
  std::string preset;
  long sim_n = 100, sim_p = 1000;
  int sim_q_true = 3;
  std::string psi_law = "uniform";
  double ig_variance = 1.0;
  int replicates = 1;
};

int resolve_threads(const CliOptions& opt) {
  if (const char* env = std::getenv("FAD_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  if (opt.threads > 0) return opt.threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

fad::ScaleMode parse_scale(const std::string& s) {
  return s == "covariance" ? fad::ScaleMode::covariance : fad::ScaleMode::correlation;
}

fad::FitConfig make_fit_config(const CliOptions& opt) {
  fad::FitConfig cfg;
  cfg.scale = parse_scale(opt.scale);
  cfg.psi_lo = opt.psi_lo;
  cfg.psi_hi = opt.psi_hi;
  cfg.lbfgs.memory = opt.lbfgs_memory;
  cfg.lbfgs.max_iter = opt.max_iter;
  cfg.lbfgs.f_rtol = opt.f_rtol;
  cfg.lbfgs.g_tol = opt.g_tol;
  cfg.em_rtol = opt.em_rtol;
  cfg.em_max_iter = opt.em_max_iter;
  cfg.em_g_tol = opt.g_tol;
  cfg.svd.delta = opt.delta;
  cfg.svd.max_restarts = opt.max_restarts;
  cfg.seed = opt.seed;
  return cfg;
}

fad::DataSet load_input(const CliOptions& opt) {
  fad::check(!opt.input.empty(), "--input is required");
  std::string fmt = opt.format;
  if (fmt == "auto") {
    fmt = opt.input.size() >= 4 && opt.input.substr(opt.input.size() - 4) == ".bin"
              ? "binary"
              : "csv";
  }
  try {
    return fmt == "binary" ? fad::DataSet::read_binary(opt.input)
                           : fad::DataSet::read_csv(opt.input, opt.csv_header);
  } catch (const fad::FadError& e) {
    throw std::runtime_error(e.what());  // I/O and ingestion problems exit 1
  }
}

json config_echo(const CliOptions& opt, int threads) {
  return json{{"input", opt.input},
              {"format", opt.format},
              {"csv_header", opt.csv_header},
              {"scale", opt.scale},
              {"method", opt.method},
              {"q", opt.q},
              {"max_factors", opt.k_max},
              {"psi_lo", opt.psi_lo},
              {"psi_hi", opt.psi_hi},
              {"max_iter", opt.max_iter},
              {"f_rtol", opt.f_rtol},
              {"g_tol", opt.g_tol},
              {"lbfgs_memory", opt.lbfgs_memory},
              {"em_rtol", opt.em_rtol},
              {"em_max_iter", opt.em_max_iter},
              {"delta", opt.delta},
              {"psvd_delta", opt.psvd_delta},
              {"max_restarts", opt.max_restarts},
              {"seed", opt.seed},
              {"threads", threads},
              {"deterministic", opt.deterministic},
              {"strict", opt.strict},
              {"report_scale", opt.report_scale},
              {"out", opt.out},
              {"out_dir", opt.out_dir}};
}

json report_to_json(const fad::FitReport& r, bool deterministic) {
  json j{{"method", fad::to_string(r.method)},
         {"q", r.q},
         {"loglik", r.loglik},
         {"bic", r.bic},
         {"grad_inf_norm", r.grad_inf_norm},
         {"score_residual_inf", r.score_residual_inf},
         {"iterations", r.iterations},
         {"lanczos_calls", r.lanczos_calls},
         {"objective_calls", r.objective_calls},
         {"wall_time_seconds", deterministic ? 0.0 : r.wall_time_seconds},
         {"converged", r.converged},
         {"hit_max_iter", r.hit_max_iter},
         {"scale", fad::to_string(r.scale)}};
  if (r.method == fad::Method::em) j["em_min_rel_increase"] = r.em_min_rel_increase;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json truth_errors_json(const fad::TruthErrors& e) {
  return json{{"d_r", e.d_r}, {"d_gamma", e.d_gamma}, {"d_llt", e.d_llt}};
}

json comparison_json(const fad::ComparisonReport& c, bool deterministic) {
  json j{{"d_psi", c.d_psi},
         {"d_gamma", c.d_gamma},
         {"d_llt", c.d_llt},
         {"d_r", c.d_r},
         {"d_loglik", c.d_loglik},
         {"speed_ratio", deterministic ? 0.0 : c.speed_ratio}};
  if (c.truth_a) j["truth_a"] = truth_errors_json(*c.truth_a);
  if (c.truth_b) j["truth_b"] = truth_errors_json(*c.truth_b);
  return j;
}

void write_vector_csv(const std::string& path, const fad::Vector& v) {
  std::ofstream out(path);
  fad::check(bool(out), "cannot write '" + path + "'");
  char buf[32];
  for (fad::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out << buf << "\n";
  }
}

void write_matrix_csv(const std::string& path, const fad::Matrix& m) {
  std::ofstream out(path);
  fad::check(bool(out), "cannot write '" + path + "'");
  char buf[32];
  for (fad::Index i = 0; i < m.rows(); ++i) {
    for (fad::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << (j + 1 < m.cols() ? "," : "");
    }
    out << "\n";
  }
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    std::ofstream f(out);
    fad::check(bool(f), "cannot write '" + out + "'");
    f << j.dump(2) << "\n";
  }
}

int run_fit(const CliOptions& opt) {
  const int threads = resolve_threads(opt);
  const fad::DataSet data = load_input(opt);
  const fad::FitConfig cfg = make_fit_config(opt);
  fad::check(opt.q >= 1, "fit: --q must be >= 1");
  const fad::FitReport rep = opt.method == "em" ? fad::fit_em(data, opt.q, cfg)
                                                : fad::fit_fad(data, opt.q, cfg);

  const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
  fs::create_directories(dir);
  const std::string loadings_path = (dir / "loadings.csv").string();
  const std::string uniq_path = (dir / "uniquenesses.csv").string();
  if (opt.report_scale == "covariance" && cfg.scale == fad::ScaleMode::correlation) {
    const fad::Loadings l{rep.lambda_hat};
    auto [ls, ps] = fad::rescale_to_covariance(l, rep.psi_hat, data);
    write_matrix_csv(loadings_path, ls.lambda);
    write_vector_csv(uniq_path, ps);
  } else {
    write_matrix_csv(loadings_path, rep.lambda_hat);
    write_vector_csv(uniq_path, rep.psi_hat);
  }

  json j{{"schema", 1}, {"command", "fit"}, {"config", config_echo(opt, threads)}};
  if (!opt.deterministic) j["timestamp"] = iso_timestamp();
  j["report"] = report_to_json(rep, opt.deterministic);
  j["report"]["files"] = json{{"loadings", loadings_path}, {"uniquenesses", uniq_path}};
  emit(j, opt.out);
  return opt.strict && !rep.converged ? 2 : 0;
}

int run_select(const CliOptions& opt) {
  const int threads = resolve_threads(opt);
  const fad::DataSet data = load_input(opt);
  const fad::FitConfig cfg = make_fit_config(opt);
  fad::check(opt.k_max >= 1, "select: --max-factors must be >= 1");
  fad::ThreadPool pool(threads);

  json j{{"schema", 1}, {"command", "select"}, {"config", config_echo(opt, threads)}};
  if (!opt.deterministic) j["timestamp"] = iso_timestamp();
  json reports = json::array();
  bool chosen_converged = true;
  int q_best = 0;

  auto run_method = [&](fad::Method method) {
    fad::SelectResult sel = fad::select_q(data, opt.k_max, method, cfg, &pool);
    for (const auto& r : sel.reports) reports.push_back(report_to_json(r, opt.deterministic));
    j[std::string("q_best_") + fad::to_string(method)] = sel.q_best;
    if (q_best == 0) {
      q_best = sel.q_best;
      chosen_converged = sel.reports[sel.q_best - 1].converged;
    }
    return sel;
  };

  std::optional<fad::SelectResult> sel_fad, sel_em;
  if (opt.method == "fad" || opt.method == "both") sel_fad = run_method(fad::Method::fad);
  if (opt.method == "em" || opt.method == "both") sel_em = run_method(fad::Method::em);
  j["q_best"] = q_best;
  j["reports"] = std::move(reports);
  emit(j, opt.out);

  // Optional run-time table, one row per method, k columns (wall seconds).
  if (!opt.out_dir.empty()) {
    fs::create_directories(opt.out_dir);
    std::ofstream table(fs::path(opt.out_dir) / "timings_table.csv");
    table << "method";
    for (int k = 1; k <= opt.k_max; ++k) table << "," << k;
    table << "\n";
    auto row = [&](const char* name, const fad::SelectResult& sel) {
      table << name;
      char buf[32];
      for (const auto& r : sel.reports) {
        std::snprintf(buf, sizeof buf, "%.6g", opt.deterministic ? 0.0 : r.wall_time_seconds);
        table << "," << buf;
      }
      table << "\n";
    };
    if (sel_fad) row("fad", *sel_fad);
    if (sel_em) row("em", *sel_em);
  }
  return opt.strict && !chosen_converged ? 2 : 0;
}

int run_compare(const CliOptions& opt) {
  const int threads = resolve_threads(opt);
  const fad::DataSet data = load_input(opt);
  const fad::FitConfig cfg = make_fit_config(opt);
  fad::check(opt.q >= 1, "compare: --q must be >= 1");
  const fad::FitReport a = fad::fit_fad(data, opt.q, cfg);
  const fad::FitReport b = fad::fit_em(data, opt.q, cfg);
  const fad::ComparisonReport cmp = fad::compare_fits(a, b);

  json j{{"schema", 1}, {"command", "compare"}, {"config", config_echo(opt, threads)}};
  if (!opt.deterministic) j["timestamp"] = iso_timestamp();
  j["fad"] = report_to_json(a, opt.deterministic);
  j["em"] = report_to_json(b, opt.deterministic);
  j["comparison"] = comparison_json(cmp, opt.deterministic);
  emit(j, opt.out);
  return opt.strict && !(a.converged && b.converged) ? 2 : 0;
}

int run_psvd(const CliOptions& opt) {
  const int threads = resolve_threads(opt);
  fad::check(!opt.input.empty(), "--input is required");
  std::string fmt = opt.format;
  if (fmt == "auto") {
    fmt = opt.input.size() >= 4 && opt.input.substr(opt.input.size() - 4) == ".bin"
              ? "binary"
              : "csv";
  }
  fad::RowMatrix raw;
  try {
    raw = fmt == "binary" ? fad::read_matrix_binary(opt.input)
                          : fad::read_matrix_csv(opt.input, opt.csv_header);
  } catch (const fad::FadError& e) {
    throw std::runtime_error(e.what());  // I/O problems are usage errors
  }
  fad::check(opt.q >= 1, "psvd: --q must be >= 1");
  fad::DenseOperator op(raw);
  fad::SvdConfig cfg;
  cfg.delta = opt.psvd_delta;
  cfg.max_restarts = opt.max_restarts;
  cfg.seed = opt.seed;
  const fad::SingularTriplets trip = fad::partial_svd(op, opt.q, cfg);

  json j{{"schema", 1}, {"command", "psvd"}, {"config", config_echo(opt, threads)}};
  if (!opt.deterministic) j["timestamp"] = iso_timestamp();
  j["values"] = std::vector<double>(trip.values.data(), trip.values.data() + trip.values.size());
  j["residuals"] =
      std::vector<double>(trip.residuals.data(), trip.residuals.data() + trip.residuals.size());
  j["restarts"] = trip.restarts;
  j["converged"] = trip.converged;
  j["matvecs"] = trip.matvecs;
  emit(j, opt.out);
  return opt.strict && !trip.converged ? 2 : 0;
}

int run_simulate(const CliOptions& opt) {
  const int threads = resolve_threads(opt);
  fad::check(!opt.out_dir.empty(), "simulate: --out is required");

  fad::SimConfig sim;
  if (!opt.preset.empty()) {
    auto preset = fad::preset_config(opt.preset);
    fad::check(bool(preset), "unknown preset '" + opt.preset + "'");
    sim = *preset;
  } else {
    sim.n = opt.sim_n;
    sim.p = opt.sim_p;
    sim.q_true = opt.sim_q_true;
    sim.psi_law = opt.psi_law == "invgamma" ? fad::PsiLaw::inverse_gamma : fad::PsiLaw::uniform;
    sim.ig_variance = opt.ig_variance;
  }
  sim.replicates = opt.replicates;
  sim.seed = opt.seed;
  if (opt.k_max > 0) sim.k_max = opt.k_max;

  fad::ExperimentOptions eopts;
  eopts.run_fad = opt.method == "fad" || opt.method == "both";
  eopts.run_em = opt.method == "em" || opt.method == "both";
  eopts.fit = make_fit_config(opt);

  fad::ThreadPool pool(threads);
  const fad::ExperimentReport rep = fad::run_experiment(sim, eopts, &pool);

  fs::create_directories(opt.out_dir);
  const bool det = opt.deterministic;

  auto quart_json = [&](const fad::Quartiles& qq, bool timing) {
    if (timing && det) return json{{"q25", 0.0}, {"median", 0.0}, {"q75", 0.0}};
    return json{{"q25", qq.q25}, {"median", qq.median}, {"q75", qq.q75}};
  };

  json j{{"schema", 1}, {"command", "simulate"}, {"config", config_echo(opt, threads)}};
  if (!opt.deterministic) j["timestamp"] = iso_timestamp();
  j["sim"] = json{{"n", sim.n},
                  {"p", sim.p},
                  {"q_true", sim.q_true},
                  {"psi_law", fad::to_string(sim.psi_law)},
                  {"uniform_lo", sim.uniform_lo},
                  {"uniform_hi", sim.uniform_hi},
                  {"ig_variance", sim.ig_variance},
                  {"replicates", sim.replicates},
                  {"seed", sim.seed},
                  {"k_max", sim.k_max}};
  j["aggregates"] = json{{"failures", rep.failures},
                         {"bic_hit_rate_fad", rep.bic_hit_rate_fad},
                         {"bic_hit_rate_em", rep.bic_hit_rate_em},
                         {"speed_ratio_em_over_fad", quart_json(rep.speed_ratio, true)},
                         {"d_r_fad", quart_json(rep.d_r_fad, false)},
                         {"d_gamma_fad", quart_json(rep.d_gamma_fad, false)},
                         {"d_llt_fad", quart_json(rep.d_llt_fad, false)},
                         {"d_r_em", quart_json(rep.d_r_em, false)},
                         {"d_gamma_em", quart_json(rep.d_gamma_em, false)},
                         {"d_llt_em", quart_json(rep.d_llt_em, false)}};
  json reps = json::array();
  for (const auto& rr : rep.replicates) {
    json je{{"rep", rr.rep}};
    if (!rr.error.empty()) {
      je["error"] = rr.error;
      reps.push_back(std::move(je));
      continue;
    }
    if (eopts.run_fad) {
      je["q_best_fad"] = rr.q_best_fad;
      if (rr.fad_errors) je["fad_errors"] = truth_errors_json(*rr.fad_errors);
      json arr = json::array();
      for (const auto& r : rr.fad_reports) arr.push_back(report_to_json(r, det));
      je["fad_reports"] = std::move(arr);
    }
    if (eopts.run_em) {
      je["q_best_em"] = rr.q_best_em;
      if (rr.em_errors) je["em_errors"] = truth_errors_json(*rr.em_errors);
      json arr = json::array();
      for (const auto& r : rr.em_reports) arr.push_back(report_to_json(r, det));
      je["em_reports"] = std::move(arr);
    }
    if (rr.cross_at_true_q) je["cross_at_true_q"] = comparison_json(*rr.cross_at_true_q, det);
    reps.push_back(std::move(je));
  }
  j["replicates"] = std::move(reps);
  emit(j, (fs::path(opt.out_dir) / "report.json").string());

  {
    std::ofstream errors(fs::path(opt.out_dir) / "errors.csv");
    errors << "rep,method,q_selected,d_r,d_gamma,d_llt\n";
    char buf[160];
    for (const auto& rr : rep.replicates) {
      if (!rr.error.empty()) continue;
      if (rr.fad_errors) {
        std::snprintf(buf, sizeof buf, "%d,fad,%d,%.17g,%.17g,%.17g\n", rr.rep, rr.q_best_fad,
                      rr.fad_errors->d_r, rr.fad_errors->d_gamma, rr.fad_errors->d_llt);
        errors << buf;
      }
      if (rr.em_errors) {
        std::snprintf(buf, sizeof buf, "%d,em,%d,%.17g,%.17g,%.17g\n", rr.rep, rr.q_best_em,
                      rr.em_errors->d_r, rr.em_errors->d_gamma, rr.em_errors->d_llt);
        errors << buf;
      }
    }
  }
  {
    std::ofstream timings(fs::path(opt.out_dir) / "timings.csv");
    timings << "rep,method,k,wall_seconds,iterations,converged\n";
    char buf[160];
    auto rows = [&](const std::vector<fad::FitReport>& rs, const char* name, int repno) {
      for (const auto& r : rs) {
        std::snprintf(buf, sizeof buf, "%d,%s,%d,%.6g,%d,%d\n", repno, name, r.q,
                      det ? 0.0 : r.wall_time_seconds, r.iterations, int(r.converged));
        timings << buf;
      }
    };
    for (const auto& rr : rep.replicates) {
      if (!rr.error.empty()) continue;
      rows(rr.fad_reports, "fad", rr.rep);
      rows(rr.em_reports, "em", rr.rep);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-free maximum-likelihood exploratory factor analysis"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_common = [&](CLI::App* sub, bool needs_input, bool json_out = true) {
    if (needs_input) {
      sub->add_option("--input", opt.input, "matrix file (CSV or FADM binary)")->required();
      sub->add_option("--format", opt.format, "csv | binary | auto")
          ->check(CLI::IsMember({"csv", "binary", "auto"}));
      sub->add_flag("--csv-header", opt.csv_header, "CSV has a single header row");
    }
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--threads", opt.threads, "worker threads (FAD_THREADS overrides)");
    sub->add_flag("--deterministic", opt.deterministic, "zero timing fields in reports");
    sub->add_flag("--strict", opt.strict, "exit 2 on non-convergence");
    if (json_out) sub->add_option("--out", opt.out, "JSON report path (stdout if omitted)");
  };
  auto add_fit_flags = [&](CLI::App* sub) {
    sub->add_option("--scale", opt.scale, "correlation | covariance")
        ->check(CLI::IsMember({"correlation", "covariance"}));
    sub->add_option("--psi-lo", opt.psi_lo, "lower bound for psi (correlation scale)");
    sub->add_option("--psi-hi", opt.psi_hi, "upper bound for psi (correlation scale)");
    sub->add_option("--max-iter", opt.max_iter, "L-BFGS-B iteration cap");
    sub->add_option("--f-rtol", opt.f_rtol, "relative increase tolerance");
    sub->add_option("--g-tol", opt.g_tol, "projected-gradient tolerance");
    sub->add_option("--lbfgs-memory", opt.lbfgs_memory, "correction pairs kept");
    sub->add_option("--em-rtol", opt.em_rtol, "EM relative change tolerance");
    sub->add_option("--em-max-iter", opt.em_max_iter, "EM iteration cap");
    sub->add_option("--delta", opt.delta, "Lanczos stopping tolerance");
    sub->add_option("--max-restarts", opt.max_restarts, "Lanczos restart cap");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a factor model at fixed q");
  add_common(fit, true);
  add_fit_flags(fit);
  fit->add_option("--q", opt.q, "number of factors")->required();
  fit->add_option("--method", opt.method, "fad | em")->check(CLI::IsMember({"fad", "em"}));
  fit->add_option("--out-dir", opt.out_dir, "directory for loadings.csv/uniquenesses.csv");
  fit->add_option("--report-scale", opt.report_scale,
                  "fitted | covariance (rescale correlation fits back to S)")
      ->check(CLI::IsMember({"fitted", "covariance"}));

  CLI::App* select = app.add_subcommand("select", "sweep factor counts and pick q by BIC");
  add_common(select, true);
  add_fit_flags(select);
  select->add_option("--max-factors", opt.k_max, "largest factor count")->required();
  select->add_option("--method", opt.method, "fad | em | both")
      ->check(CLI::IsMember({"fad", "em", "both"}));
  select->add_option("--out-dir", opt.out_dir, "directory for the timings table");

  CLI::App* compare = app.add_subcommand("compare", "run FAD and EM at one q and compare");
  add_common(compare, true);
  add_fit_flags(compare);
  compare->add_option("--q", opt.q, "number of factors")->required();

  CLI::App* psvd = app.add_subcommand("psvd", "partial SVD of the matrix in a file");
  add_common(psvd, true);
  psvd->add_option("--q", opt.q, "number of singular triplets")->required();
  psvd->add_option("--delta", opt.psvd_delta, "stopping tolerance");
  psvd->add_option("--max-restarts", opt.max_restarts, "restart cap");

  CLI::App* simulate = app.add_subcommand("simulate", "synthetic benchmark harness");
  add_common(simulate, false, false);
  add_fit_flags(simulate);
  simulate->add_option("--preset", opt.preset, "paper-small | paper-mid | high-noise | ultra");
  simulate->add_option("--n", opt.sim_n, "observations");
  simulate->add_option("--p", opt.sim_p, "variables");
  simulate->add_option("--q-true", opt.sim_q_true, "true factor count");
  simulate->add_option("--psi-law", opt.psi_law, "uniform | invgamma")
      ->check(CLI::IsMember({"uniform", "invgamma"}));
  simulate->add_option("--ig-variance", opt.ig_variance, "inverse-gamma variance");
  simulate->add_option("--replicates", opt.replicates, "replicate count");
  simulate->add_option("--max-factors", opt.k_max, "sweep upper bound");
  simulate->add_option("--method", opt.method, "fad | em | both")
      ->check(CLI::IsMember({"fad", "em", "both"}));
  simulate->add_option("--out", opt.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; nonzero on error
  }

  try {
    if (fit->parsed()) return run_fit(opt);
    if (select->parsed()) return run_select(opt);
    if (compare->parsed()) return run_compare(opt);
    if (psvd->parsed()) return run_psvd(opt);
    if (simulate->parsed()) return run_simulate(opt);
  } catch (const fad::FadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
