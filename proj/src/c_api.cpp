#include "debias_ate.h"

#include <cmath>
#include <cstring>
#include <string>

#include "debias/csv.hpp"
#include "debias/harness.hpp"

namespace {

thread_local std::string t_last_error;

da_status fail(da_status code, const char* what) {
  t_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
da_status guarded(Fn&& fn) {
  try {
    fn();
    return DA_OK;
  } catch (const debias::ValidationError& e) {
    return fail(DA_ERR_VALIDATION, e.what());
  } catch (const debias::NumericError& e) {
    return fail(DA_ERR_NUMERIC, e.what());
  } catch (const debias::IoError& e) {
    return fail(DA_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(DA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DA_ERR_INTERNAL, "unknown exception");
  }
}

debias::GpSettings to_gp_settings(const da_fit_options& o) {
  debias::GpSettings gp;
  gp.draws = o.draws;
  gp.alpha = o.alpha;
  gp.trunc_lo = o.trunc_lo;
  gp.trunc_hi = o.trunc_hi;
  if (!std::isnan(o.nu_override)) gp.nu_override = o.nu_override;
  gp.optimizer.restarts = o.restarts;
  gp.optimizer.lbfgs.max_iter = o.max_iter;
  return gp;
}

debias::Method apply_randomize(debias::Method m, int32_t randomize) {
  using debias::Method;
  if (randomize) return m;
  if (m == Method::Gp) return Method::GpNoRand;
  if (m == Method::GpPs) return Method::GpPsNoRand;
  return m;
}

}  // namespace

struct da_dataset {
  debias::ObservationalDataset data;
  double true_ate = std::numeric_limits<double>::quiet_NaN();
  double true_cate = std::numeric_limits<double>::quiet_NaN();
};

struct da_effect {
  debias::SingleFit fit;
};

struct da_report {
  debias::BenchmarkReport report;
};

extern "C" {

const char* da_version(void) { return "0.1.0"; }

const char* da_last_error(void) { return t_last_error.c_str(); }

da_status da_dataset_load_csv(const char* path, const char* treatment_col,
                              const char* outcome_col, const char* feature_cols,
                              da_dataset** out) {
  if (!path || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    debias::DatasetSchema schema;
    if (treatment_col) schema.treatment = treatment_col;
    if (outcome_col) schema.outcome = outcome_col;
    if (feature_cols && *feature_cols) {
      std::string list(feature_cols);
      std::size_t start = 0;
      while (start <= list.size()) {
        std::size_t pos = list.find(',', start);
        std::string tok = list.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) schema.features.push_back(tok);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    auto* h = new da_dataset;
    h->data = debias::load_dataset(path, schema);
    *out = h;
  });
}

da_status da_dataset_from_arrays(size_t n, size_t d, const double* x_rowmajor, const int32_t* r,
                                 const double* y, da_dataset** out) {
  if (!x_rowmajor || !r || !y || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    debias::Matrix X(static_cast<debias::Index>(n), static_cast<debias::Index>(d));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < d; ++j)
        X(static_cast<debias::Index>(i), static_cast<debias::Index>(j)) = x_rowmajor[i * d + j];
    debias::IntVector R(static_cast<debias::Index>(n));
    debias::Vector Y(static_cast<debias::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      R[static_cast<debias::Index>(i)] = r[i];
      Y[static_cast<debias::Index>(i)] = y[i];
    }
    auto* h = new da_dataset;
    h->data = debias::make_dataset(std::move(X), std::move(R), std::move(Y));
    *out = h;
  });
}

da_status da_dataset_simulate(const char* generator, size_t n, size_t d, uint64_t seed,
                              da_dataset** out) {
  if (!generator || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    std::string g(generator);
    debias::Generator mode;
    if (g == "HOM")
      mode = debias::Generator::Hom;
    else if (g == "HET")
      mode = debias::Generator::Het;
    else
      throw debias::ValidationError("generator must be HOM or HET");
    auto inst = debias::gen_synthetic(static_cast<debias::Index>(n),
                                      static_cast<debias::Index>(d), mode, seed);
    auto* h = new da_dataset{std::move(inst.data), inst.true_ate, inst.true_cate};
    *out = h;
  });
}

da_status da_dataset_simulate_ihdp(const char* covariates_csv, uint64_t seed, da_dataset** out) {
  if (!covariates_csv || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    debias::CsvTable table = debias::read_csv(covariates_csv);
    debias::Index rcol = table.column_index("treatment");
    if (rcol < 0)
      throw debias::ValidationError(std::string(covariates_csv) + ": no 'treatment' column");
    debias::Matrix X(table.values.rows(), table.values.cols() - 1);
    debias::Index k = 0;
    for (debias::Index j = 0; j < table.values.cols(); ++j)
      if (j != rcol) X.col(k++) = table.values.col(j);
    debias::IntVector R(table.values.rows());
    for (debias::Index i = 0; i < table.values.rows(); ++i) {
      double v = table.values(i, rcol);
      if (v != 0.0 && v != 1.0)
        throw debias::ValidationError(std::string(covariates_csv) + ": treatment must be 0/1");
      R[i] = static_cast<int>(v);
    }
    auto inst = debias::gen_ihdp_outcomes(X, R, seed);
    auto* h = new da_dataset{std::move(inst.data), inst.true_ate, inst.true_cate};
    *out = h;
  });
}

size_t da_dataset_n(const da_dataset* data) { return data ? static_cast<size_t>(data->data.n()) : 0; }
size_t da_dataset_d(const da_dataset* data) { return data ? static_cast<size_t>(data->data.d()) : 0; }

void da_dataset_true_effects(const da_dataset* data, double* ate, double* cate) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (ate) *ate = data ? data->true_ate : nan;
  if (cate) *cate = data ? data->true_cate : nan;
}

da_status da_dataset_write_csv(const da_dataset* data, const char* path) {
  if (!data || !path) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] { debias::write_dataset_csv(data->data, path); });
}

void da_dataset_free(da_dataset* data) { delete data; }

void da_fit_options_defaults(da_fit_options* opts) {
  if (!opts) return;
  opts->draws = 2000;
  opts->alpha = 0.05;
  opts->seed = 1;
  opts->trunc_lo = 0.1;
  opts->trunc_hi = 0.9;
  opts->nu_override = std::numeric_limits<double>::quiet_NaN();
  opts->restarts = 3;
  opts->max_iter = 200;
  opts->randomize = 1;
}

da_status da_fit(const da_dataset* data, const char* method, const da_fit_options* opts,
                 da_effect** out) {
  if (!data || !method || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    da_fit_options o;
    if (opts)
      o = *opts;
    else
      da_fit_options_defaults(&o);
    debias::Method m = apply_randomize(debias::parse_method(method), o.randomize);
    auto* h = new da_effect;
    try {
      h->fit = debias::fit_single(data->data, m, to_gp_settings(o), o.seed);
    } catch (...) {
      delete h;
      throw;
    }
    *out = h;
  });
}

double da_effect_estimate(const da_effect* e) {
  return e ? e->fit.estimate() : std::numeric_limits<double>::quiet_NaN();
}
double da_effect_ci_low(const da_effect* e) {
  return e ? e->fit.ci_low() : std::numeric_limits<double>::quiet_NaN();
}
double da_effect_ci_high(const da_effect* e) {
  return e ? e->fit.ci_high() : std::numeric_limits<double>::quiet_NaN();
}
size_t da_effect_num_draws(const da_effect* e) {
  return e && e->fit.posterior ? static_cast<size_t>(e->fit.posterior->draws.size()) : 0;
}

da_status da_effect_copy_draws(const da_effect* e, double* buf, size_t len) {
  if (!e || !buf) return fail(DA_ERR_VALIDATION, "null argument");
  size_t n = da_effect_num_draws(e);
  if (len < n) return fail(DA_ERR_VALIDATION, "buffer too small");
  if (n) std::memcpy(buf, e->fit.posterior->draws.data(), n * sizeof(double));
  return DA_OK;
}

da_status da_effect_write(const da_effect* e, const char* dir, int32_t hist_bins) {
  if (!e || !dir) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] { debias::write_single_fit(e->fit, dir, hist_bins); });
}

void da_effect_free(da_effect* e) { delete e; }

void da_bench_options_defaults(da_bench_options* opts) {
  if (!opts) return;
  opts->generator = "HET";
  opts->dataset_path = nullptr;
  opts->treatment_col = nullptr;
  opts->outcome_col = nullptr;
  opts->file_truth = std::numeric_limits<double>::quiet_NaN();
  opts->ihdp_covariates = nullptr;
  opts->methods = "gp,gp-ps";
  opts->target = "ATE";
  opts->n = 500;
  opts->d = 100;
  opts->replications = 50;
  opts->threads = 0;
  da_fit_options_defaults(&opts->fit);
}

da_status da_bench_run(const da_bench_options* opts, da_report** out) {
  if (!opts || !out) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] {
    debias::BenchConfig cfg;
    std::string g = opts->generator ? opts->generator : "HET";
    if (g == "HOM")
      cfg.source = debias::SourceKind::Hom;
    else if (g == "HET")
      cfg.source = debias::SourceKind::Het;
    else if (g == "IHDP-B")
      cfg.source = debias::SourceKind::IhdpB;
    else if (g == "file")
      cfg.source = debias::SourceKind::File;
    else
      throw debias::ValidationError("generator must be HOM|HET|IHDP-B|file");
    cfg.n = opts->n;
    cfg.d = opts->d;
    cfg.replications = opts->replications;
    cfg.methods = debias::parse_methods(opts->methods ? opts->methods : "");
    std::string target = opts->target ? opts->target : "ATE";
    if (target == "ATE")
      cfg.target = debias::Target::Ate;
    else if (target == "CATE")
      cfg.target = debias::Target::Cate;
    else
      throw debias::ValidationError("target must be ATE or CATE");
    cfg.seed = opts->fit.seed;
    cfg.gp = to_gp_settings(opts->fit);
    if (opts->dataset_path) cfg.dataset_path = opts->dataset_path;
    if (opts->treatment_col) cfg.schema.treatment = opts->treatment_col;
    if (opts->outcome_col) cfg.schema.outcome = opts->outcome_col;
    cfg.file_truth = opts->file_truth;
    if (opts->ihdp_covariates) cfg.ihdp_covariates = opts->ihdp_covariates;
    cfg.threads = opts->threads;
    if (!opts->fit.randomize) {
      for (auto& m : cfg.methods) m = apply_randomize(m, 0);
    }
    auto* h = new da_report;
    try {
      h->report = debias::run_replications(cfg);
    } catch (...) {
      delete h;
      throw;
    }
    *out = h;
  });
}

size_t da_report_num_rows(const da_report* r) { return r ? r->report.rows.size() : 0; }

da_status da_report_row(const da_report* r, size_t i, da_bench_row* out) {
  if (!r || !out) return fail(DA_ERR_VALIDATION, "null argument");
  if (i >= r->report.rows.size()) return fail(DA_ERR_VALIDATION, "row index out of range");
  const auto& s = r->report.rows[i];
  std::snprintf(out->method, sizeof out->method, "%s", debias::method_name(s.method).c_str());
  out->abs_error_mean = s.abs_error_mean;
  out->abs_error_sd = s.abs_error_sd;
  out->ci_size_mean = s.ci_size_mean;
  out->ci_size_sd = s.ci_size_sd;
  out->coverage = s.coverage;
  out->type2_error = s.type2_error;
  out->failures = s.failures;
  out->completed = s.completed;
  return DA_OK;
}

int32_t da_report_failed(const da_report* r) { return r && r->report.failed() ? 1 : 0; }

double da_report_wall_seconds(const da_report* r) { return r ? r->report.wall_seconds : 0.0; }

da_status da_report_write(const da_report* r, const char* dir) {
  if (!r || !dir) return fail(DA_ERR_VALIDATION, "null argument");
  return guarded([&] { debias::write_report(r->report, dir); });
}

void da_report_free(da_report* r) { delete r; }

}  // extern "C"
