#pragma once

#include "debias/common.hpp"

namespace debias {

// Fitted logistic propensity model pi(x) = P(R=1 | X=x), with hard
// truncation of predictions to [lower, upper]. Immutable once fitted.
struct PropensityModel {
  Vector beta;  // length d+1: intercept followed by slopes, original scale
  double lower = 0.1;
  double upper = 0.9;
  double ridge = 0.0;
  bool converged = false;
  int iterations = 0;

  // clamp(sigmoid(beta . [1; x]), lower, upper)
  double predict(const Eigen::Ref<const Vector>& x) const;
  Vector predict_all(const Matrix& X) const;
};

struct LogisticConfig {
  // L2 penalty on the slope coefficients of the per-observation-mean
  // objective: f(b) = mean_i nll_i(b) + (ridge/2) * |b_slopes|^2.
  // The intercept is not penalized. The default keeps near-separable
  // designs (deterministic treatment rules) well posed.
  double ridge = 1e-4;
  int max_iter = 100;
  double tol = 1e-8;  // on the max-norm of the penalized gradient
  double lower = 0.1;
  double upper = 0.9;
};

// Newton/IRLS with step halving on standardized features; the
// standardization is folded back into beta so predict() works on the
// original scale. Requires both treatment labels present.
PropensityModel fit_logistic(const Matrix& X, const IntVector& R, const LogisticConfig& cfg = {});

// Value of the fitting objective at a given beta (original-scale
// coefficients, intercept first). Exposed for verification.
double logistic_objective(const Matrix& X, const IntVector& R, const Vector& beta, double ridge);

// Riesz-representer weights at the observations.
//   w_f[i] = R_i/ps_i - (1-R_i)/(1-ps_i)      (factual)
//   w_c[i] = (1-R_i)/ps_i - R_i/(1-ps_i)      (counterfactual)
//   m_n    = mean_i |w_f[i]|
struct RieszWeights {
  Vector w_f;
  Vector w_c;
  double m_n = 0.0;
};

RieszWeights riesz_weights(const IntVector& R, const Vector& ps);

}  // namespace debias
