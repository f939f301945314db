#pragma once

#include <cstdint>
#include <string>

#include "debias/data.hpp"
#include "debias/gp.hpp"
#include "debias/rng.hpp"

namespace debias {

// Marginal posterior of the (C)ATE.
struct EffectPosterior {
  Vector draws;            // psi_1..psi_P
  double post_mean = 0.0;  // analytic, from mu; not a draw average
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool randomized = true;  // Bayesian bootstrap vs plug-in 1/n feature weights
  double alpha = 0.05;
};

struct BaselineEstimate {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string method;
};

// Dir(n; 1,...,1) via normalized Exp(1) variables.
Vector dirichlet_weights(Index n, Rng& rng);

// (1/n) sum_i [m(X_i,1) - m(X_i,0)] read off the stacked posterior mean:
// entry i is the factual value, entry n+i the counterfactual one, so the
// treated-minus-control contrast carries a sign depending on R_i.
double posterior_mean_ate(const Vector& mu, const IntVector& R);

// Empirical equal-tail quantile with linear interpolation between order
// statistics. Exposed for the report writers.
double empirical_quantile(const Vector& sorted, double q);

// Draws P posterior samples of psi: m ~ N(mu, Sigma) through one reused
// factorization of Sigma, contrasts weighted by fresh Dirichlet weights
// (randomized) or by 1/n (plug-in). Each draw has its own substream of
// `seed`, so the same seed yields the same m-draws in both modes.
EffectPosterior sample_effect_posterior(const PosteriorMoments& moments, const IntVector& R,
                                        Index num_draws, bool randomized, std::uint64_t seed,
                                        double alpha = 0.05);

// Per-group linear regression baseline. estimate = mean_i [f1(X_i) - f0(X_i)],
// normal-approximation interval from the classical coefficient covariance
// (homoskedastic within group, mean feature vector treated as fixed).
BaselineEstimate ols_ate(const ObservationalDataset& data, double alpha = 0.05);

// Horvitz-Thompson inverse-propensity-weighting baseline on truncated scores.
BaselineEstimate ipw_ate(const ObservationalDataset& data, const Vector& ps, double alpha = 0.05);

// Quantile of the standard normal (Acklam's rational approximation,
// |relative error| < 1.2e-9).
double normal_quantile(double p);

}  // namespace debias
