#pragma once

#include <cstdint>
#include <optional>

#include "debias/kernels.hpp"
#include "debias/optim.hpp"
#include "debias/propensity.hpp"

namespace debias {

// Joint posterior of the regression surface at the stacked design Z_star:
// factual rows first, counterfactual rows below. prior_scale records the
// magnitude of the prior variances that were subtracted to form sigma, the
// relevant scale for telling rounding noise from real indefiniteness when
// the posterior has contracted to ~0.
struct PosteriorMoments {
  Vector mu;     // length 2n
  Matrix sigma;  // 2n x 2n, symmetrized
  double prior_scale = 0.0;
};

struct FitReport {
  GPHyperParams params;
  double log_ml = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
};

struct LmlResult {
  double value = 0.0;
  Vector grad;  // d/d[log l_1 .. log l_{d+1}, log rho^2, log sigma^2]
};

// Log marginal likelihood of Y under the GP with kernel K(Z,Z)
// [+ nu^2 w_f w_f^T when weights are given] + sigma^2 I, with its analytic
// gradient with respect to the log-hyperparameters. nu is fixed, never a
// gradient coordinate.
LmlResult log_marginal_likelihood(const GPHyperParams& params, const Matrix& Z, const Vector& Y,
                                  const Vector* w_f = nullptr);

struct GpOptimizerConfig {
  int restarts = 3;
  LbfgsConfig lbfgs{};
  std::uint64_t seed = 1;  // stream for restart jitter
  // Initialization: length scales at the per-coordinate sd of the inputs
  // (treatment coordinate at 1), signal and noise variance both at var(Y).
  // Optional alternative: scale the length-scale init by sqrt(#inputs) so
  // the kernel starts informative when d is large; when enabled, one
  // restart still runs from the unscaled point.
  bool scale_init_by_sqrt_dim = false;
  // Optional lower bound on the noise variance as a fraction of var(Y);
  // guards against interpolation collapse of high-dimensional ARD fits.
  double noise_floor_frac = 0.0;
};

// Maximizes the log marginal likelihood over log-hyperparameters with
// L-BFGS; the correction term is excluded (nu = 0). Returns the best of
// `restarts` runs.
FitReport optimize_hyperparams(const Matrix& Z, const Vector& Y, const GpOptimizerConfig& cfg = {});

// Posterior mean and covariance of the surface at Z_star, computed through
// Cholesky solves. The weight vector attached to Z_star rows is the
// concatenation (w_f, w_c); pass nu = 0 in params (with any weights) for
// the uncorrected posterior.
PosteriorMoments posterior_moments(const GPHyperParams& params, const Matrix& Z,
                                   const Matrix& Z_star, const Vector& Y,
                                   const RieszWeights& weights);
PosteriorMoments posterior_moments(const GPHyperParams& params, const Matrix& Z,
                                   const Matrix& Z_star, const Vector& Y);

}  // namespace debias
