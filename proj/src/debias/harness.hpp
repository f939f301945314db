#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debias/effects.hpp"
#include "debias/simgen.hpp"

namespace debias {

enum class Method { Gp, GpPs, GpNoRand, GpPsNoRand, Ols, Ipw };

std::string method_name(Method m);
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_list);

enum class Target { Ate, Cate };

// Settings shared by the GP-based methods.
struct GpSettings {
  Index draws = 2000;
  double alpha = 0.05;
  double trunc_lo = 0.1;
  double trunc_hi = 0.9;
  std::optional<double> nu_override;  // bypass the calibration rule
  // Optionally fit the GP on mean-centered outcomes. Off by default: the
  // mean-zero prior is applied to the raw outcomes, and the estimated
  // signal variance (which feeds the nu rule) absorbs the outcome level.
  bool center_outcome = false;
  double ridge = 8e-3;  // propensity fit penalty (mean-scaled objective)
  GpOptimizerConfig optimizer{};
};

enum class SourceKind { Hom, Het, IhdpB, File };

struct BenchConfig {
  SourceKind source = SourceKind::Het;
  Index n = 500;
  Index d = 100;
  int replications = 50;
  std::vector<Method> methods{Method::Gp, Method::GpPs};
  Target target = Target::Ate;
  std::uint64_t seed = 1;
  GpSettings gp{};
  std::string dataset_path;  // source == File
  DatasetSchema schema{};    // source == File
  double file_truth = std::numeric_limits<double>::quiet_NaN();
  std::string ihdp_covariates;  // source == IhdpB
  int threads = 0;              // 0: DEBIAS_ATE_THREADS env var, then hardware
};

struct MethodSummary {
  Method method = Method::Gp;
  double abs_error_mean = 0.0;
  double abs_error_sd = 0.0;
  double ci_size_mean = 0.0;
  double ci_size_sd = 0.0;
  double coverage = 0.0;
  double type2_error = 0.0;
  int failures = 0;
  int completed = 0;
};

struct ReplicationRow {
  int rep = 0;
  Method method = Method::Gp;
  bool ok = false;
  std::string error;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double truth = 0.0;
};

struct BenchmarkReport {
  BenchConfig config;
  std::vector<MethodSummary> rows;
  std::vector<ReplicationRow> records;  // rep-major, method order as configured
  double wall_seconds = 0.0;            // not written to report files

  // true when any method failed on more than 20% of replications
  bool failed() const;
};

// Runs `replications` independent simulations (parallel across a worker
// pool; per-replication seeds derived from config.seed) and aggregates the
// four benchmark metrics per method.
BenchmarkReport run_replications(const BenchConfig& config);

// report.csv + report.txt + replications.csv under dir (created if needed).
// Output bytes depend only on (config, seed).
void write_report(const BenchmarkReport& report, const std::string& dir);

// Single-dataset fit with one method.
struct SingleFit {
  Method method = Method::Gp;
  std::optional<EffectPosterior> posterior;  // GP methods
  std::optional<BaselineEstimate> baseline;  // OLS / IPW
  double nu = 0.0;                           // correction scale used (0 for plain GP)

  double estimate() const;
  double ci_low() const;
  double ci_high() const;
};

SingleFit fit_single(const ObservationalDataset& data, Method method, const GpSettings& gp,
                     std::uint64_t seed);

// draws.csv, summary.csv and histogram.csv (hist_bins > 0) under dir.
void write_single_fit(const SingleFit& fit, const std::string& dir, int hist_bins = 40);

int resolve_threads(int requested, int jobs);

}  // namespace debias
