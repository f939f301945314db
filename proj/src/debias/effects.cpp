#include "debias/effects.hpp"

#include <algorithm>
#include <cmath>

namespace debias {

Vector dirichlet_weights(Index n, Rng& rng) {
  if (n < 1) throw ValidationError("dirichlet_weights: need n >= 1");
  Vector u(n);
  for (Index i = 0; i < n; ++i) u[i] = rng.exponential();
  return u / u.sum();
}

double posterior_mean_ate(const Vector& mu, const IntVector& R) {
  const Index n = R.size();
  if (mu.size() != 2 * n)
    throw ValidationError("posterior_mean_ate: mu must have length 2n");
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    double contrast = mu[i] - mu[n + i];
    acc += R[i] ? contrast : -contrast;
  }
  return acc / static_cast<double>(n);
}

double empirical_quantile(const Vector& sorted, double q) {
  const Index p = sorted.size();
  if (p == 0) throw ValidationError("empirical_quantile: empty sample");
  if (p == 1) return sorted[0];
  double h = q * static_cast<double>(p - 1);
  Index lo = static_cast<Index>(std::floor(h));
  lo = std::clamp<Index>(lo, 0, p - 2);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

// Factor Sigma for sampling: plain Cholesky first, then the escalating
// jitter ladder 1e-10..1e-6 of trace/(2n). An exactly zero Sigma yields a
// zero factor (degenerate but legal: all draws collapse onto mu). A fully
// contracted posterior (Sigma ~ 0 plus rounding noise from prior-scale
// cancellations) defeats any trace-scaled jitter; for that case a pivoted
// LDLT with nonnegative-clamped D gives an exact PSD factor, accepted only
// when the negative mass is within rounding of the working scale.
Matrix sampling_factor(const Matrix& sigma, double prior_scale) {
  const Index m = sigma.rows();
  const double tbar = sigma.trace() / static_cast<double>(m);
  if (sigma.cwiseAbs().maxCoeff() == 0.0) return Matrix::Zero(m, m);
  if (tbar > 0) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    for (double f = 1e-10; f <= 1e-6 * (1.0 + 1e-12); f *= 10.0) {
      Matrix s = sigma;
      s.diagonal().array() += f * tbar;
      llt.compute(s);
      if (llt.info() == Eigen::Success) return llt.matrixL();
    }
  }
  Eigen::LDLT<Matrix> ldlt(sigma);
  Vector dvec = ldlt.vectorD();
  double dmax = std::max(dvec.maxCoeff(), 0.0);
  double repair_tol = std::max({1e-6 * std::max(tbar, 0.0), 1e-8 * dmax, 1e-7 * prior_scale});
  if (ldlt.info() != Eigen::Success || dvec.minCoeff() < -repair_tol)
    throw NumericError("sample_effect_posterior: covariance factorization failed after jitter");
  Matrix L = ldlt.matrixL();
  L *= dvec.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return ldlt.transpositionsP().transpose() * L;
}

}  // namespace

EffectPosterior sample_effect_posterior(const PosteriorMoments& moments, const IntVector& R,
                                        Index num_draws, bool randomized, std::uint64_t seed,
                                        double alpha) {
  const Index n = R.size();
  const Index m = moments.mu.size();
  if (m != 2 * n) throw ValidationError("sample_effect_posterior: moments are not 2n-dimensional");
  if (moments.sigma.rows() != m || moments.sigma.cols() != m)
    throw ValidationError("sample_effect_posterior: sigma shape mismatch");
  if (num_draws < 2) throw ValidationError("sample_effect_posterior: need at least 2 draws");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("sample_effect_posterior: alpha in (0,1)");
  if (static_cast<double>(num_draws) * alpha / 2.0 < 1.0)
    throw ValidationError("sample_effect_posterior: too few draws for the requested quantiles");

  const Matrix L = sampling_factor(moments.sigma, moments.prior_scale);

  EffectPosterior out;
  out.randomized = randomized;
  out.alpha = alpha;
  out.post_mean = posterior_mean_ate(moments.mu, R);
  out.draws.resize(num_draws);

  Vector sgn(n);
  for (Index i = 0; i < n; ++i) sgn[i] = R[i] ? 1.0 : -1.0;

  // blocked so the normal draws go through GEMM while every draw keeps its
  // own seed-derived stream (deterministic under any block size)
  constexpr Index kBlock = 256;
  Matrix z(m, std::min(kBlock, num_draws));
  Matrix mdraw;
  Vector contrast(n);
  for (Index start = 0; start < num_draws; start += kBlock) {
    const Index b = std::min(kBlock, num_draws - start);
    for (Index l = 0; l < b; ++l) {
      Rng r(mix(seed, static_cast<std::uint64_t>(start + l), 0xA11CE5ULL));
      for (Index i = 0; i < m; ++i) z(i, l) = r.normal();
    }
    mdraw.noalias() = L * z.leftCols(b);
    mdraw.colwise() += moments.mu;
    for (Index l = 0; l < b; ++l) {
      contrast = sgn.cwiseProduct(mdraw.col(l).head(n) - mdraw.col(l).tail(n));
      if (randomized) {
        Rng r(mix(seed, static_cast<std::uint64_t>(start + l), 0xD1511ULL));
        out.draws[start + l] = dirichlet_weights(n, r).dot(contrast);
      } else {
        out.draws[start + l] = contrast.mean();
      }
    }
  }

  Vector sorted = out.draws;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  out.ci_low = empirical_quantile(sorted, alpha / 2.0);
  out.ci_high = empirical_quantile(sorted, 1.0 - alpha / 2.0);
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

namespace {

struct GroupFit {
  Vector coef;      // length d+1, intercept first
  Matrix cov;       // classical covariance of coef
};

GroupFit fit_group(const Matrix& A, const Vector& y) {
  const Index p = A.cols();
  const Index ng = A.rows();
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  GroupFit fit;
  bool ridged = false;
  Matrix xtx = A.transpose() * A;
  if (qr.rank() < p) {
    // rank-deficient design: one automatic ridge fallback
    ridged = true;
    xtx.diagonal().array() += 1e-6;
    fit.coef = xtx.ldlt().solve(A.transpose() * y);
  } else {
    fit.coef = qr.solve(y);
  }
  if (!fit.coef.allFinite())
    throw NumericError("ols_ate: rank-deficient design; ridge fallback failed");
  double rss = (y - A * fit.coef).squaredNorm();
  double s2 = rss / static_cast<double>(ng - p);
  Matrix xtx_inv = xtx.ldlt().solve(Matrix::Identity(p, p));
  fit.cov = s2 * xtx_inv;
  (void)ridged;
  return fit;
}

}  // namespace

BaselineEstimate ols_ate(const ObservationalDataset& data, double alpha) {
  const Index n = data.n();
  const Index d = data.d();
  const Index p = d + 1;
  std::vector<Index> treated, control;
  for (Index i = 0; i < n; ++i) (data.R[i] ? treated : control).push_back(i);
  if (static_cast<Index>(treated.size()) <= p || static_cast<Index>(control.size()) <= p)
    throw ValidationError("ols_ate: each group needs more than d+1 units");

  auto build = [&](const std::vector<Index>& idx, Matrix& A, Vector& y) {
    A.resize(static_cast<Index>(idx.size()), p);
    y.resize(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      A(static_cast<Index>(k), 0) = 1.0;
      A.row(static_cast<Index>(k)).tail(d) = data.X.row(idx[k]);
      y[static_cast<Index>(k)] = data.Y[idx[k]];
    }
  };
  Matrix A1, A0;
  Vector y1, y0;
  build(treated, A1, y1);
  build(control, A0, y0);
  GroupFit f1 = fit_group(A1, y1);
  GroupFit f0 = fit_group(A0, y0);

  Vector xbar(p);
  xbar[0] = 1.0;
  xbar.tail(d) = data.X.colwise().mean();

  BaselineEstimate est;
  est.method = "ols";
  est.estimate = xbar.dot(f1.coef - f0.coef);
  double var = xbar.dot((f1.cov + f0.cov) * xbar);
  double z = normal_quantile(1.0 - alpha / 2.0);
  double half = z * std::sqrt(std::max(var, 0.0));
  est.ci_low = est.estimate - half;
  est.ci_high = est.estimate + half;
  return est;
}

BaselineEstimate ipw_ate(const ObservationalDataset& data, const Vector& ps, double alpha) {
  const Index n = data.n();
  if (ps.size() != n) throw ValidationError("ipw_ate: ps length mismatch");
  Vector terms(n);
  for (Index i = 0; i < n; ++i) {
    double p = ps[i];
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("ipw_ate: propensity outside (0,1)");
    terms[i] = data.R[i] ? data.Y[i] / p : -data.Y[i] / (1.0 - p);
  }
  BaselineEstimate est;
  est.method = "ipw";
  est.estimate = terms.mean();
  double var = (terms.array() - est.estimate).square().sum() /
               (static_cast<double>(n - 1) * static_cast<double>(n));
  double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(var);
  est.ci_low = est.estimate - half;
  est.ci_high = est.estimate + half;
  return est;
}

}  // namespace debias
