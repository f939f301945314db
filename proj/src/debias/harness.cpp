#include "debias/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "debias/csv.hpp"

namespace debias {

namespace {

constexpr std::uint64_t kRepStream = 0x5EEDULL;
constexpr std::uint64_t kOptStream = 0x0B7ULL;
constexpr std::uint64_t kDrawPlain = 0xD0AULL;
constexpr std::uint64_t kDrawPs = 0xD0BULL;

bool is_gp(Method m) {
  return m == Method::Gp || m == Method::GpPs || m == Method::GpNoRand || m == Method::GpPsNoRand;
}
bool is_corrected(Method m) { return m == Method::GpPs || m == Method::GpPsNoRand; }
bool is_randomized(Method m) { return m == Method::Gp || m == Method::GpPs; }

// Lazily shared per-dataset work: one propensity fit, one hyperparameter
// optimization and at most two moment computations serve all six methods.
struct FitContext {
  const ObservationalDataset& data;
  const GpSettings& gp;
  std::uint64_t seed;

  std::optional<StackedDesign> design_;
  std::optional<PropensityModel> model_;
  Vector ps_;
  std::optional<RieszWeights> weights_;
  std::optional<FitReport> fit_;
  Vector y_fit_;
  std::optional<PosteriorMoments> mom_plain_, mom_ps_;
  double nu_ = 0.0;

  FitContext(const ObservationalDataset& d, const GpSettings& g, std::uint64_t s)
      : data(d), gp(g), seed(s) {}

  const StackedDesign& design() {
    if (!design_) design_ = stack_design(data);
    return *design_;
  }

  const RieszWeights& weights() {
    if (!weights_) {
      LogisticConfig cfg;
      cfg.ridge = gp.ridge;
      cfg.lower = gp.trunc_lo;
      cfg.upper = gp.trunc_hi;
      model_ = fit_logistic(data.X, data.R, cfg);
      ps_ = model_->predict_all(data.X);
      weights_ = riesz_weights(data.R, ps_);
    }
    return *weights_;
  }

  const FitReport& fit() {
    if (!fit_) {
      y_fit_ = gp.center_outcome ? Vector(data.Y.array() - data.Y.mean()) : data.Y;
      GpOptimizerConfig cfg = gp.optimizer;
      cfg.seed = mix(seed, kOptStream);
      fit_ = optimize_hyperparams(design().Z, y_fit_, cfg);
    }
    return *fit_;
  }

  const PosteriorMoments& moments(bool corrected) {
    const FitReport& report = fit();
    if (corrected) {
      if (!mom_ps_) {
        const RieszWeights& w = weights();
        nu_ = gp.nu_override ? *gp.nu_override
                             : calibrate_nu(report.params.signal_var, data.n(), w.m_n);
        GPHyperParams params = report.params;
        params.nu = nu_;
        mom_ps_ = posterior_moments(params, design().Z, design().Z_star, y_fit_, w);
      }
      return *mom_ps_;
    }
    if (!mom_plain_)
      mom_plain_ = posterior_moments(report.params, design().Z, design().Z_star, y_fit_);
    return *mom_plain_;
  }
};

SingleFit run_method(FitContext& ctx, Method method) {
  SingleFit out;
  out.method = method;
  if (method == Method::Ols) {
    out.baseline = ols_ate(ctx.data, ctx.gp.alpha);
    return out;
  }
  if (method == Method::Ipw) {
    ctx.weights();  // fit the propensity model
    out.baseline = ipw_ate(ctx.data, ctx.ps_, ctx.gp.alpha);
    return out;
  }
  const bool corrected = is_corrected(method);
  const PosteriorMoments& mom = ctx.moments(corrected);
  std::uint64_t draw_seed = mix(ctx.seed, corrected ? kDrawPs : kDrawPlain);
  out.posterior = sample_effect_posterior(mom, ctx.data.R, ctx.gp.draws, is_randomized(method),
                                          draw_seed, ctx.gp.alpha);
  out.nu = corrected ? ctx.nu_ : 0.0;
  return out;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Gp: return "gp";
    case Method::GpPs: return "gp-ps";
    case Method::GpNoRand: return "gp-norand";
    case Method::GpPsNoRand: return "gp-ps-norand";
    case Method::Ols: return "ols";
    case Method::Ipw: return "ipw";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Gp, Method::GpPs, Method::GpNoRand, Method::GpPsNoRand, Method::Ols,
                   Method::Ipw})
    if (method_name(m) == name) return m;
  throw ValidationError("unknown method '" + name +
                        "' (expected gp|gp-ps|gp-norand|gp-ps-norand|ols|ipw)");
}

std::vector<Method> parse_methods(const std::string& comma_list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    std::size_t pos = comma_list.find(',', start);
    std::string tok = comma_list.substr(start, pos == std::string::npos ? pos : pos - start);
    if (!tok.empty()) out.push_back(parse_method(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw ValidationError("methods list is empty");
  return out;
}

double SingleFit::estimate() const {
  return posterior ? posterior->post_mean : baseline->estimate;
}
double SingleFit::ci_low() const { return posterior ? posterior->ci_low : baseline->ci_low; }
double SingleFit::ci_high() const { return posterior ? posterior->ci_high : baseline->ci_high; }

SingleFit fit_single(const ObservationalDataset& data, Method method, const GpSettings& gp,
                     std::uint64_t seed) {
  FitContext ctx(data, gp, seed);
  return run_method(ctx, method);
}

int resolve_threads(int requested, int jobs) {
  int t = requested;
  if (t <= 0) {
    if (const char* env = std::getenv("DEBIAS_ATE_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return std::max(1, std::min(t, jobs));
}

bool BenchmarkReport::failed() const {
  for (const auto& row : rows)
    if (row.failures > 0.2 * config.replications) return true;
  return false;
}

BenchmarkReport run_replications(const BenchConfig& config) {
  if (config.replications < 1) throw ValidationError("bench: replications >= 1 required");
  if (config.methods.empty()) throw ValidationError("bench: methods must be nonempty");
  if (config.source == SourceKind::IhdpB && config.target == Target::Ate)
    throw ValidationError("bench: IHDP-B defines only the CATE; use --target CATE");

  // fixed per-run inputs
  std::optional<ObservationalDataset> file_data;
  Matrix ihdp_X;
  IntVector ihdp_R;
  if (config.source == SourceKind::File) {
    file_data = load_dataset(config.dataset_path, config.schema);
  } else if (config.source == SourceKind::IhdpB) {
    CsvTable table = read_csv(config.ihdp_covariates);
    Index rcol = table.column_index("treatment");
    if (rcol < 0)
      throw ValidationError(config.ihdp_covariates + ": no 'treatment' column");
    ihdp_X.resize(table.values.rows(), table.values.cols() - 1);
    Index k = 0;
    for (Index j = 0; j < table.values.cols(); ++j) {
      if (j == rcol) continue;
      ihdp_X.col(k++) = table.values.col(j);
    }
    ihdp_R.resize(table.values.rows());
    for (Index i = 0; i < table.values.rows(); ++i) {
      double v = table.values(i, rcol);
      if (v != 0.0 && v != 1.0)
        throw ValidationError(config.ihdp_covariates + ": treatment must be 0/1");
      ihdp_R[i] = static_cast<int>(v);
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const int reps = config.replications;
  const std::size_t methods_per_rep = config.methods.size();
  std::vector<ReplicationRow> records(static_cast<std::size_t>(reps) * methods_per_rep);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int rep = next.fetch_add(1);
      if (rep >= reps) return;
      std::uint64_t seed_r = mix(config.seed, kRepStream, static_cast<std::uint64_t>(rep));

      SimulatedInstance inst;
      bool generated = true;
      std::string gen_error;
      try {
        switch (config.source) {
          case SourceKind::Hom:
          case SourceKind::Het:
            inst = gen_synthetic(config.n, config.d,
                                 config.source == SourceKind::Hom ? Generator::Hom : Generator::Het,
                                 seed_r);
            break;
          case SourceKind::IhdpB:
            inst = gen_ihdp_outcomes(ihdp_X, ihdp_R, seed_r);
            break;
          case SourceKind::File:
            inst.data = *file_data;
            inst.true_ate = config.file_truth;
            inst.true_cate = config.file_truth;
            inst.seed = seed_r;
            break;
        }
      } catch (const std::exception& e) {
        generated = false;
        gen_error = e.what();
      }

      double truth = std::numeric_limits<double>::quiet_NaN();
      if (generated)
        truth = config.target == Target::Ate ? inst.true_ate : inst.true_cate;

      FitContext ctx(inst.data, config.gp, seed_r);
      for (std::size_t mi = 0; mi < methods_per_rep; ++mi) {
        ReplicationRow& row = records[static_cast<std::size_t>(rep) * methods_per_rep + mi];
        row.rep = rep;
        row.method = config.methods[mi];
        row.truth = truth;
        if (!generated) {
          row.ok = false;
          row.error = gen_error;
          continue;
        }
        try {
          SingleFit fit = run_method(ctx, config.methods[mi]);
          row.estimate = fit.estimate();
          row.ci_low = fit.ci_low();
          row.ci_high = fit.ci_high();
          row.ok = true;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = std::string(method_name(config.methods[mi])) + ": " + e.what();
        }
      }
    }
  };

  const int nthreads = resolve_threads(config.threads, reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchmarkReport report;
  report.config = config;
  report.records = std::move(records);
  for (std::size_t mi = 0; mi < methods_per_rep; ++mi) {
    MethodSummary s;
    s.method = config.methods[mi];
    std::vector<double> abs_err, ci_size;
    double cover = 0.0, type2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const ReplicationRow& row = report.records[static_cast<std::size_t>(rep) * methods_per_rep + mi];
      if (!row.ok) {
        ++s.failures;
        continue;
      }
      abs_err.push_back(std::abs(row.estimate - row.truth));
      ci_size.push_back(row.ci_high - row.ci_low);
      cover += (row.truth >= row.ci_low && row.truth <= row.ci_high) ? 1.0 : 0.0;
      type2 += (0.0 >= row.ci_low && 0.0 <= row.ci_high) ? 1.0 : 0.0;
    }
    s.completed = static_cast<int>(abs_err.size());
    auto mean_of = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return v.empty() ? std::numeric_limits<double>::quiet_NaN() : acc / static_cast<double>(v.size());
    };
    auto sd_of = [&](const std::vector<double>& v, double mean) {
      if (v.size() < 2) return 0.0;
      double acc = 0.0;
      for (double x : v) acc += (x - mean) * (x - mean);
      return std::sqrt(acc / static_cast<double>(v.size() - 1));
    };
    s.abs_error_mean = mean_of(abs_err);
    s.abs_error_sd = sd_of(abs_err, s.abs_error_mean);
    s.ci_size_mean = mean_of(ci_size);
    s.ci_size_sd = sd_of(ci_size, s.ci_size_mean);
    s.coverage = s.completed ? cover / s.completed : std::numeric_limits<double>::quiet_NaN();
    s.type2_error = s.completed ? type2 / s.completed : std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(std::move(s));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

namespace {

std::string source_name(SourceKind s) {
  switch (s) {
    case SourceKind::Hom: return "HOM";
    case SourceKind::Het: return "HET";
    case SourceKind::IhdpB: return "IHDP-B";
    case SourceKind::File: return "file";
  }
  return "?";
}

std::string config_echo(const BenchConfig& c) {
  char buf[512];
  std::string methods;
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    if (i) methods += ',';
    methods += method_name(c.methods[i]);
  }
  std::snprintf(buf, sizeof buf,
                "generator=%s n=%lld d=%lld replications=%d methods=%s target=%s draws=%lld "
                "alpha=%g seed=%llu trunc=[%g,%g] nu=%s",
                source_name(c.source).c_str(), static_cast<long long>(c.n),
                static_cast<long long>(c.d), c.replications, methods.c_str(),
                c.target == Target::Ate ? "ATE" : "CATE", static_cast<long long>(c.gp.draws),
                c.gp.alpha, static_cast<unsigned long long>(c.seed), c.gp.trunc_lo, c.gp.trunc_hi,
                c.gp.nu_override ? std::to_string(*c.gp.nu_override).c_str() : "calibrated");
  return buf;
}

}  // namespace

void write_report(const BenchmarkReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  char buf[256];

  {
    std::ofstream csv(dir + "/report.csv");
    if (!csv) throw IoError("cannot write " + dir + "/report.csv");
    csv << "# " << config_echo(report.config) << "\n";
    csv << "method,abs_error_mean,abs_error_sd,ci_size_mean,ci_size_sd,coverage,type2_error,"
           "failures,completed\n";
    for (const auto& r : report.rows) {
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%d\n",
                    method_name(r.method).c_str(), r.abs_error_mean, r.abs_error_sd, r.ci_size_mean,
                    r.ci_size_sd, r.coverage, r.type2_error, r.failures, r.completed);
      csv << buf;
    }
  }
  {
    std::ofstream txt(dir + "/report.txt");
    if (!txt) throw IoError("cannot write " + dir + "/report.txt");
    txt << config_echo(report.config) << "\n\n";
    std::snprintf(buf, sizeof buf, "%-14s %-18s %-18s %-9s %s\n", "Method", "Abs. error +- sd",
                  "Size CI +- sd", "Coverage", "Type II error");
    txt << buf;
    for (const auto& r : report.rows) {
      std::snprintf(buf, sizeof buf, "%-14s %6.3f +- %-8.3f %6.3f +- %-8.3f %-9.2f %.2f",
                    method_name(r.method).c_str(), r.abs_error_mean, r.abs_error_sd, r.ci_size_mean,
                    r.ci_size_sd, r.coverage, r.type2_error);
      txt << buf;
      if (r.failures) txt << "   [" << r.failures << " failed]";
      txt << "\n";
    }
  }
  {
    std::ofstream rcsv(dir + "/replications.csv");
    if (!rcsv) throw IoError("cannot write " + dir + "/replications.csv");
    rcsv << "rep,method,ok,estimate,ci_low,ci_high,truth,error\n";
    for (const auto& row : report.records) {
      std::snprintf(buf, sizeof buf, "%d,%s,%d,%.10g,%.10g,%.10g,%.10g,", row.rep,
                    method_name(row.method).c_str(), row.ok ? 1 : 0, row.estimate, row.ci_low,
                    row.ci_high, row.truth);
      rcsv << buf;
      for (char ch : row.error) rcsv << (ch == ',' || ch == '\n' ? ';' : ch);
      rcsv << "\n";
    }
  }
}

void write_single_fit(const SingleFit& fit, const std::string& dir, int hist_bins) {
  std::filesystem::create_directories(dir);
  char buf[256];
  {
    std::ofstream s(dir + "/summary.csv");
    if (!s) throw IoError("cannot write " + dir + "/summary.csv");
    s << "method,estimate,ci_low,ci_high,alpha,draws,randomized,nu\n";
    double alpha = fit.posterior ? fit.posterior->alpha : 0.05;
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%g,%lld,%d,%.10g\n",
                  method_name(fit.method).c_str(), fit.estimate(), fit.ci_low(), fit.ci_high(),
                  alpha, fit.posterior ? static_cast<long long>(fit.posterior->draws.size()) : 0LL,
                  fit.posterior && fit.posterior->randomized ? 1 : 0, fit.nu);
    s << buf;
  }
  if (!fit.posterior) return;
  const Vector& draws = fit.posterior->draws;
  {
    std::ofstream d(dir + "/draws.csv");
    if (!d) throw IoError("cannot write " + dir + "/draws.csv");
    d << "psi\n";
    for (Index i = 0; i < draws.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", draws[i]);
      d << buf;
    }
  }
  if (hist_bins > 0) {
    double lo = draws.minCoeff(), hi = draws.maxCoeff();
    if (hi <= lo) hi = lo + 1.0;
    double width = (hi - lo) / hist_bins;
    std::vector<int> counts(static_cast<std::size_t>(hist_bins), 0);
    for (Index i = 0; i < draws.size(); ++i) {
      int b = static_cast<int>((draws[i] - lo) / width);
      b = std::clamp(b, 0, hist_bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    std::ofstream h(dir + "/histogram.csv");
    if (!h) throw IoError("cannot write " + dir + "/histogram.csv");
    h << "bin_low,bin_high,count\n";
    for (int b = 0; b < hist_bins; ++b) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%d\n", lo + b * width, lo + (b + 1) * width,
                    counts[static_cast<std::size_t>(b)]);
      h << buf;
    }
  }
}

}  // namespace debias
