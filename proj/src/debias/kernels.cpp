#include "debias/kernels.hpp"

#include <cmath>

namespace debias {

void GPHyperParams::validate() const {
  if (length_scales.size() < 1 || !(length_scales.array() > 0).all())
    throw ValidationError("hyperparams: length scales must be positive");
  if (!(signal_var > 0)) throw ValidationError("hyperparams: signal_var must be positive");
  if (!(noise_var > 0)) throw ValidationError("hyperparams: noise_var must be positive");
  if (!(nu >= 0)) throw ValidationError("hyperparams: nu must be nonnegative");
}

double se_ard(const GPHyperParams& params, const Eigen::Ref<const Vector>& z,
              const Eigen::Ref<const Vector>& z2) {
  const Index m = params.length_scales.size();
  if (z.size() != m || z2.size() != m)
    throw ValidationError("se_ard: input dimension does not match length scales");
  double s = ((z - z2).array() / params.length_scales.array()).square().sum();
  return params.signal_var * std::exp(-0.5 * s);
}

Matrix se_ard_gram(const GPHyperParams& params, const Matrix& A, const Matrix& B) {
  const Index m = params.length_scales.size();
  if (A.cols() != m || B.cols() != m)
    throw ValidationError("se_ard_gram: input dimension does not match length scales");
  // scaled inputs -> squared distances via the norm expansion
  Matrix As = A * params.length_scales.cwiseInverse().asDiagonal();
  Matrix Bs = B * params.length_scales.cwiseInverse().asDiagonal();
  Vector a2 = As.rowwise().squaredNorm();
  Vector b2 = Bs.rowwise().squaredNorm();
  Matrix S = (-2.0 * As * Bs.transpose());
  S.colwise() += a2;
  S.rowwise() += b2.transpose();
  return params.signal_var * (-0.5 * S.cwiseMax(0.0)).array().exp();
}

Matrix corrected_gram(const GPHyperParams& params, const Matrix& A, const Matrix& B,
                      const Vector& wA, const Vector& wB) {
  if (wA.size() != A.rows() || wB.size() != B.rows())
    throw ValidationError("corrected_gram: weight vector length does not match rows");
  Matrix K = se_ard_gram(params, A, B);
  if (params.nu != 0.0) K.noalias() += (params.nu * params.nu) * (wA * wB.transpose());
  return K;
}

double calibrate_nu(double signal_var, Index n, double m_n) {
  if (!(signal_var > 0) || n < 1 || !(m_n > 0))
    throw ValidationError("calibrate_nu: all inputs must be positive");
  return 0.2 * std::sqrt(signal_var) / (std::sqrt(static_cast<double>(n)) * m_n);
}

CholeskyResult cholesky_with_jitter(const Matrix& K) {
  if (K.rows() != K.cols()) throw ValidationError("cholesky_with_jitter: matrix not square");
  const double mean_diag = K.diagonal().mean();
  const double scale = mean_diag > 0 ? mean_diag : 1.0;
  CholeskyResult out;
  for (double factor = kJitterBase; factor <= kJitterMax * (1.0 + 1e-12); factor *= 2.0) {
    Matrix Kj = K;
    out.jitter = factor * scale;
    Kj.diagonal().array() += out.jitter;
    out.llt.compute(Kj);
    if (out.llt.info() == Eigen::Success) return out;
  }
  throw NumericError("cholesky_with_jitter: factorization failed after jitter escalation");
}

}  // namespace debias
