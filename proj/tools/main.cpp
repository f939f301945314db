// debias-ate CLI: simulate benchmark datasets, fit a single dataset, or run
// a replication study. Talks to the core exclusively through the C API.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "debias_ate.h"

namespace {

int report_error(da_status status) {
  std::fprintf(stderr, "error: %s\n", da_last_error());
  return status == DA_ERR_VALIDATION || status == DA_ERR_IO ? 1 : 2;
}

struct CommonOpts {
  std::uint64_t seed = 1;
  std::int64_t draws = 2000;
  double alpha = 0.05;
  double trunc_lo = 0.1;
  double trunc_hi = 0.9;
  double nu = std::numeric_limits<double>::quiet_NaN();
  bool no_randomize = false;
  int restarts = 3;
  int max_iter = 200;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master random seed");
    cmd->add_option("--draws", draws, "posterior draws for GP methods");
    cmd->add_option("--alpha", alpha, "credible level 1-alpha");
    cmd->add_option("--trunc-lo", trunc_lo, "propensity truncation floor");
    cmd->add_option("--trunc-hi", trunc_hi, "propensity truncation ceiling");
    cmd->add_option("--nu", nu, "override the calibrated correction scale");
    cmd->add_flag("--no-randomize-f", no_randomize,
                  "plug-in 1/n feature weights instead of the Bayesian bootstrap");
    cmd->add_option("--restarts", restarts, "hyperparameter optimizer restarts");
    cmd->add_option("--max-iter", max_iter, "optimizer iteration cap per restart");
  }

  da_fit_options fit_options() const {
    da_fit_options o;
    da_fit_options_defaults(&o);
    o.seed = seed;
    o.draws = draws;
    o.alpha = alpha;
    o.trunc_lo = trunc_lo;
    o.trunc_hi = trunc_hi;
    o.nu_override = nu;
    o.randomize = no_randomize ? 0 : 1;
    o.restarts = restarts;
    o.max_iter = max_iter;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debiased GP inference for average treatment effects"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(da_version()));

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate a benchmark dataset and write it to CSV");
  std::string sim_generator = "HET";
  std::int64_t sim_n = 500, sim_d = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "dataset.csv";
  std::string sim_ihdp;
  sim->add_option("--generator", sim_generator, "HOM|HET|IHDP-B")->capture_default_str();
  sim->add_option("--n", sim_n, "sample size")->capture_default_str();
  sim->add_option("--d", sim_d, "feature dimension")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--ihdp-covariates", sim_ihdp, "covariate CSV for IHDP-B");
  sim->add_option("--out", sim_out, "output CSV path")->capture_default_str();

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit one dataset and export the effect posterior");
  std::string fit_path, fit_method = "gp-ps", fit_out = "fit_out";
  std::string fit_rcol = "r", fit_ycol = "y", fit_features;
  int fit_hist_bins = 40;
  CommonOpts fit_common;
  fit->add_option("path", fit_path, "dataset CSV")->required();
  fit->add_option("--method", fit_method, "gp|gp-ps|gp-norand|gp-ps-norand|ols|ipw")
      ->capture_default_str();
  fit->add_option("--treatment-col", fit_rcol, "treatment column name")->capture_default_str();
  fit->add_option("--outcome-col", fit_ycol, "outcome column name")->capture_default_str();
  fit->add_option("--feature-cols", fit_features, "comma-separated feature columns (default: rest)");
  fit->add_option("--hist-bins", fit_hist_bins, "histogram bins (0 disables)")->capture_default_str();
  fit->add_option("--out", fit_out, "output directory")->capture_default_str();
  fit_common.add_to(fit);

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "replication study: absolute error, CI size, coverage, Type II error");
  std::string b_generator = "HET", b_methods = "gp,gp-ps", b_target = "ATE";
  std::string b_out = "bench_out", b_file, b_rcol = "r", b_ycol = "y", b_ihdp;
  std::int64_t b_n = 500, b_d = 100;
  int b_reps = 50, b_threads = 0;
  double b_truth = std::numeric_limits<double>::quiet_NaN();
  CommonOpts b_common;
  bench->add_option("--generator", b_generator, "HOM|HET|IHDP-B|file")->capture_default_str();
  bench->add_option("--n", b_n, "sample size per replication")->capture_default_str();
  bench->add_option("--d", b_d, "feature dimension")->capture_default_str();
  bench->add_option("--reps", b_reps, "number of replications")->capture_default_str();
  bench->add_option("--methods", b_methods, "comma-separated method list")->capture_default_str();
  bench->add_option("--target", b_target, "ATE|CATE")->capture_default_str();
  bench->add_option("--file", b_file, "dataset CSV for generator=file");
  bench->add_option("--treatment-col", b_rcol, "treatment column (file)")->capture_default_str();
  bench->add_option("--outcome-col", b_ycol, "outcome column (file)")->capture_default_str();
  bench->add_option("--truth", b_truth, "known effect for generator=file metrics");
  bench->add_option("--ihdp-covariates", b_ihdp, "covariate CSV for IHDP-B");
  bench->add_option("--threads", b_threads, "worker threads (0: DEBIAS_ATE_THREADS or hardware)");
  bench->add_option("--out", b_out, "output directory")->capture_default_str();
  b_common.add_to(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  if (sim->parsed()) {
    da_dataset* data = nullptr;
    da_status st;
    if (sim_generator == "IHDP-B") {
      if (sim_ihdp.empty()) {
        std::fprintf(stderr, "error: IHDP-B needs --ihdp-covariates\n");
        return 1;
      }
      st = da_dataset_simulate_ihdp(sim_ihdp.c_str(), sim_seed, &data);
    } else {
      st = da_dataset_simulate(sim_generator.c_str(), static_cast<size_t>(sim_n),
                               static_cast<size_t>(sim_d), sim_seed, &data);
    }
    if (st != DA_OK) return report_error(st);
    st = da_dataset_write_csv(data, sim_out.c_str());
    if (st != DA_OK) {
      da_dataset_free(data);
      return report_error(st);
    }
    double ate = 0, cate = 0;
    da_dataset_true_effects(data, &ate, &cate);
    std::printf("wrote %s: n=%zu d=%zu true_ate=%g true_cate=%.10g\n", sim_out.c_str(),
                da_dataset_n(data), da_dataset_d(data), ate, cate);
    da_dataset_free(data);
    return 0;
  }

  if (fit->parsed()) {
    da_dataset* data = nullptr;
    da_status st = da_dataset_load_csv(fit_path.c_str(), fit_rcol.c_str(), fit_ycol.c_str(),
                                       fit_features.empty() ? nullptr : fit_features.c_str(), &data);
    if (st != DA_OK) return report_error(st);
    da_fit_options opts = fit_common.fit_options();
    da_effect* effect = nullptr;
    st = da_fit(data, fit_method.c_str(), &opts, &effect);
    da_dataset_free(data);
    if (st != DA_OK) return report_error(st);
    st = da_effect_write(effect, fit_out.c_str(), fit_hist_bins);
    if (st != DA_OK) {
      da_effect_free(effect);
      return report_error(st);
    }
    std::printf("%s: estimate=%.6g CI=[%.6g, %.6g]", fit_method.c_str(),
                da_effect_estimate(effect), da_effect_ci_low(effect), da_effect_ci_high(effect));
    if (size_t nd = da_effect_num_draws(effect)) std::printf(" draws=%zu", nd);
    std::printf("  -> %s\n", fit_out.c_str());
    da_effect_free(effect);
    return 0;
  }

  // bench
  da_bench_options opts;
  da_bench_options_defaults(&opts);
  opts.generator = b_generator.c_str();
  opts.methods = b_methods.c_str();
  opts.target = b_target.c_str();
  opts.n = b_n;
  opts.d = b_d;
  opts.replications = b_reps;
  opts.threads = b_threads;
  opts.fit = b_common.fit_options();
  if (!b_file.empty()) opts.dataset_path = b_file.c_str();
  opts.treatment_col = b_rcol.c_str();
  opts.outcome_col = b_ycol.c_str();
  opts.file_truth = b_truth;
  if (!b_ihdp.empty()) opts.ihdp_covariates = b_ihdp.c_str();

  da_report* report = nullptr;
  da_status st = da_bench_run(&opts, &report);
  if (st != DA_OK) return report_error(st);
  st = da_report_write(report, b_out.c_str());
  if (st != DA_OK) {
    da_report_free(report);
    return report_error(st);
  }
  std::printf("%-14s %-18s %-18s %-9s %s\n", "Method", "Abs. error +- sd", "Size CI +- sd",
              "Coverage", "Type II error");
  for (size_t i = 0; i < da_report_num_rows(report); ++i) {
    da_bench_row row;
    da_report_row(report, i, &row);
    std::printf("%-14s %6.3f +- %-8.3f %6.3f +- %-8.3f %-9.2f %.2f", row.method,
                row.abs_error_mean, row.abs_error_sd, row.ci_size_mean, row.ci_size_sd,
                row.coverage, row.type2_error);
    if (row.failures) std::printf("   [%d failed]", row.failures);
    std::printf("\n");
  }
  int failed = da_report_failed(report);
  double wall = da_report_wall_seconds(report);
  da_report_free(report);
  if (failed) {
    std::fprintf(stderr, "error: more than 20%% of replications failed\n");
    return 2;
  }
  std::printf("%d replications in %.1f s; report written to %s\n", b_reps, wall, b_out.c_str());
  return 0;
}
