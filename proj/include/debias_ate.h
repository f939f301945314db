/* debias_ate: propensity-corrected Gaussian process estimation of average
 * treatment effects from observational data.
 *
 * C API over the C++ core: opaque handles, integer status codes, thread-local
 * error messages. All functions returning da_status set the last-error string
 * on failure; handles returned through out-parameters are owned by the caller
 * and released with the matching *_free function.
 */
#ifndef DEBIAS_ATE_H
#define DEBIAS_ATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DA_API __declspec(dllexport)
#else
#define DA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum da_status {
  DA_OK = 0,
  DA_ERR_VALIDATION = 1, /* invalid arguments, malformed files, bad preconditions */
  DA_ERR_NUMERIC = 2,    /* factorization/optimization failure */
  DA_ERR_IO = 3,         /* filesystem problems */
  DA_ERR_INTERNAL = 4
} da_status;

DA_API const char* da_version(void);

/* Message for the most recent failure on the calling thread. */
DA_API const char* da_last_error(void);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct da_dataset da_dataset;

/* Loads a CSV with a header row. feature_cols is a comma-separated list of
 * column names, or NULL to use every column not named as treatment/outcome. */
DA_API da_status da_dataset_load_csv(const char* path, const char* treatment_col,
                                     const char* outcome_col, const char* feature_cols,
                                     da_dataset** out);

DA_API da_status da_dataset_from_arrays(size_t n, size_t d, const double* x_rowmajor,
                                        const int32_t* r, const double* y, da_dataset** out);

/* generator: "HOM" or "HET". The returned dataset carries its ground-truth
 * ATE and realized CATE. */
DA_API da_status da_dataset_simulate(const char* generator, size_t n, size_t d, uint64_t seed,
                                     da_dataset** out);

/* IHDP-style semi-synthetic outcomes over a user-supplied covariate CSV
 * (one binary column named "treatment", remaining numeric columns are
 * features). Realized CATE is 4 by construction. */
DA_API da_status da_dataset_simulate_ihdp(const char* covariates_csv, uint64_t seed,
                                          da_dataset** out);

DA_API size_t da_dataset_n(const da_dataset* data);
DA_API size_t da_dataset_d(const da_dataset* data);

/* Ground-truth effects attached by the simulators; NaN when unknown. */
DA_API void da_dataset_true_effects(const da_dataset* data, double* ate, double* cate);

DA_API da_status da_dataset_write_csv(const da_dataset* data, const char* path);
DA_API void da_dataset_free(da_dataset* data);

/* ------------------------------------------------------------------ */
/* Single fits                                                         */

typedef struct da_fit_options {
  int64_t draws;        /* posterior samples for GP methods (default 2000) */
  double alpha;         /* credible level 1-alpha (default 0.05) */
  uint64_t seed;        /* default 1 */
  double trunc_lo;      /* propensity truncation (default 0.1) */
  double trunc_hi;      /* default 0.9 */
  double nu_override;   /* NaN: calibrate nu by the closed-form rule */
  int32_t restarts;     /* hyperparameter optimizer restarts (default 3) */
  int32_t max_iter;     /* optimizer iteration cap per restart (default 200) */
  int32_t randomize;    /* 1: Bayesian-bootstrap feature weights (gp, gp-ps) */
} da_fit_options;

DA_API void da_fit_options_defaults(da_fit_options* opts);

typedef struct da_effect da_effect;

/* method: gp | gp-ps | gp-norand | gp-ps-norand | ols | ipw */
DA_API da_status da_fit(const da_dataset* data, const char* method, const da_fit_options* opts,
                        da_effect** out);

DA_API double da_effect_estimate(const da_effect* e);
DA_API double da_effect_ci_low(const da_effect* e);
DA_API double da_effect_ci_high(const da_effect* e);
DA_API size_t da_effect_num_draws(const da_effect* e); /* 0 for ols/ipw */
DA_API da_status da_effect_copy_draws(const da_effect* e, double* buf, size_t len);

/* Writes summary.csv, draws.csv and histogram.csv (hist_bins > 0) to dir. */
DA_API da_status da_effect_write(const da_effect* e, const char* dir, int32_t hist_bins);
DA_API void da_effect_free(da_effect* e);

/* ------------------------------------------------------------------ */
/* Replication benchmark                                               */

typedef struct da_bench_options {
  const char* generator;       /* "HOM" | "HET" | "IHDP-B" | "file" */
  const char* dataset_path;    /* generator == "file" */
  const char* treatment_col;   /* file schema; NULL -> "r" */
  const char* outcome_col;     /* file schema; NULL -> "y" */
  double file_truth;           /* known truth for file runs; NaN if unknown */
  const char* ihdp_covariates; /* generator == "IHDP-B" */
  const char* methods;         /* comma-separated list */
  const char* target;          /* "ATE" | "CATE" */
  int64_t n, d;
  int32_t replications;
  int32_t threads; /* 0: DEBIAS_ATE_THREADS env var, then hardware */
  da_fit_options fit;
} da_bench_options;

DA_API void da_bench_options_defaults(da_bench_options* opts);

typedef struct da_bench_row {
  char method[24];
  double abs_error_mean, abs_error_sd;
  double ci_size_mean, ci_size_sd;
  double coverage, type2_error;
  int32_t failures, completed;
} da_bench_row;

typedef struct da_report da_report;

DA_API da_status da_bench_run(const da_bench_options* opts, da_report** out);
DA_API size_t da_report_num_rows(const da_report* r);
DA_API da_status da_report_row(const da_report* r, size_t i, da_bench_row* out);

/* 1 when any method failed on more than 20% of replications. */
DA_API int32_t da_report_failed(const da_report* r);

/* Wall-clock seconds of the replication run (not part of the report files). */
DA_API double da_report_wall_seconds(const da_report* r);

/* report.csv, report.txt, replications.csv under dir. */
DA_API da_status da_report_write(const da_report* r, const char* dir);
DA_API void da_report_free(da_report* r);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DEBIAS_ATE_H */
