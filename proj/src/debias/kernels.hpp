#pragma once

#include "debias/common.hpp"

namespace debias {

// Hyperparameters of the propensity-corrected ARD squared-exponential
// kernel. All stored on the natural scale; the marginal-likelihood
// optimizer works on logs of everything except nu, which is set in closed
// form after fitting (nu = 0 disables the correction).
struct GPHyperParams {
  Vector length_scales;     // length d+1, the last entry is the treatment coordinate
  double signal_var = 1.0;  // rho_m^2
  double noise_var = 1.0;   // sigma_n^2
  double nu = 0.0;

  void validate() const;
};

// rho_m^2 * exp(-1/2 sum_i (z_i - z2_i)^2 / l_i^2)
double se_ard(const GPHyperParams& params, const Eigen::Ref<const Vector>& z,
              const Eigen::Ref<const Vector>& z2);

// Base Gram matrix K(A, B) without the correction term.
Matrix se_ard_gram(const GPHyperParams& params, const Matrix& A, const Matrix& B);

// Corrected cross-covariance: entry (i,j) = se_ard(A_i, B_j) + nu^2 wA_i wB_j.
// wA/wB carry the Riesz weight attached to each row (factual weight for a
// factual row, counterfactual weight for a counterfactual row).
Matrix corrected_gram(const GPHyperParams& params, const Matrix& A, const Matrix& B,
                      const Vector& wA, const Vector& wB);

// nu_n = 0.2 rho_m / (sqrt(n) M_n)
double calibrate_nu(double signal_var, Index n, double m_n);

// Cholesky of a symmetric PSD matrix with diagonal jitter: 1e-8 * mean
// diagonal is always added, doubling on failure up to 1e-4 * mean diagonal.
// Throws NumericError when the ladder is exhausted.
struct CholeskyResult {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};

CholeskyResult cholesky_with_jitter(const Matrix& K);

inline constexpr double kJitterBase = 1e-8;
inline constexpr double kJitterMax = 1e-4;

}  // namespace debias
