#include "debias/propensity.hpp"

#include <cmath>

namespace debias {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// log(1 + e^t) without overflow
double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

}  // namespace

double PropensityModel::predict(const Eigen::Ref<const Vector>& x) const {
  if (x.size() + 1 != beta.size())
    throw ValidationError("predict_ps: feature dimension mismatch");
  double t = beta[0] + beta.tail(beta.size() - 1).dot(x);
  return std::clamp(sigmoid(t), lower, upper);
}

Vector PropensityModel::predict_all(const Matrix& X) const {
  if (X.cols() + 1 != beta.size())
    throw ValidationError("predict_ps: feature dimension mismatch");
  Vector t = (X * beta.tail(beta.size() - 1)).array() + beta[0];
  return t.unaryExpr([&](double v) { return std::clamp(sigmoid(v), lower, upper); });
}

double logistic_objective(const Matrix& X, const IntVector& R, const Vector& beta, double ridge) {
  const Index n = X.rows();
  const Index d = X.cols();
  Vector t = (X * beta.tail(d)).array() + beta[0];
  double nll = 0.0;
  for (Index i = 0; i < n; ++i) nll += softplus(t[i]) - (R[i] ? t[i] : 0.0);
  // the penalty acts on the standardized-scale slopes, matching the fit
  double pen = 0.0;
  for (Index j = 0; j < d; ++j) {
    double v = (X.col(j).array() - X.col(j).mean()).square().sum() / static_cast<double>(n);
    pen += beta[j + 1] * beta[j + 1] * (v > 0 ? v : 1.0);
  }
  return nll / static_cast<double>(n) + 0.5 * ridge * pen;
}

PropensityModel fit_logistic(const Matrix& X, const IntVector& R, const LogisticConfig& cfg) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (R.size() != n) throw ValidationError("fit_logistic: X and R row counts disagree");
  if (cfg.ridge < 0) throw ValidationError("fit_logistic: ridge must be nonnegative");
  if (!(cfg.lower > 0 && cfg.lower < 0.5 && cfg.upper > 0.5 && cfg.upper < 1))
    throw ValidationError("fit_logistic: truncation bounds must satisfy 0 < lower < 0.5 < upper < 1");
  const int ones = (R.array() == 1).count();
  if (ones == 0 || ones == n)
    throw ValidationError("fit_logistic: both treatment labels must be present");

  // standardize columns; constant columns get scale 1 and stay at slope 0
  Vector mean = X.colwise().mean();
  Vector sd(d);
  for (Index j = 0; j < d; ++j) {
    double v = (X.col(j).array() - mean[j]).square().sum() / static_cast<double>(n);
    sd[j] = v > 0 ? std::sqrt(v) : 1.0;
  }
  Matrix A(n, d + 1);
  A.col(0).setOnes();
  for (Index j = 0; j < d; ++j) A.col(j + 1) = (X.col(j).array() - mean[j]) / sd[j];

  Vector pen = Vector::Constant(d + 1, cfg.ridge);
  pen[0] = 0.0;

  auto objective = [&](const Vector& b) {
    Vector t = A * b;
    double nll = 0.0;
    for (Index i = 0; i < n; ++i) nll += softplus(t[i]) - (R[i] ? t[i] : 0.0);
    return nll / static_cast<double>(n) + 0.5 * (pen.array() * b.array().square()).sum();
  };

  Vector b = Vector::Zero(d + 1);
  double f = objective(b);
  if (!std::isfinite(f)) throw NumericError("fit_logistic: non-finite likelihood at start");

  bool converged = false;
  int iter = 0;
  Vector grad(d + 1), p(n), wdiag(n);
  for (; iter < cfg.max_iter; ++iter) {
    Vector t = A * b;
    for (Index i = 0; i < n; ++i) p[i] = sigmoid(t[i]);
    grad = A.transpose() * (p - R.cast<double>()) / static_cast<double>(n) +
           (pen.array() * b.array()).matrix();
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.tol) {
      converged = true;
      break;
    }
    wdiag = (p.array() * (1.0 - p.array()) / static_cast<double>(n)).matrix();
    Matrix H = A.transpose() * wdiag.asDiagonal() * A;
    H.diagonal() += pen;

    Vector step = H.ldlt().solve(grad);
    if (!step.allFinite() || (H * step - grad).norm() > 1e-6 * (1.0 + grad.norm())) {
      if (cfg.ridge == 0.0)
        throw NumericError(
            "fit_logistic: singular Hessian; the design is rank deficient or separable, "
            "use a positive ridge");
      Matrix Hd = H;
      Hd.diagonal().array() += 1e-10 * H.trace();
      step = Hd.ldlt().solve(grad);
      if (!step.allFinite()) throw NumericError("fit_logistic: Newton step failed");
    }

    double eta = 1.0;
    double fnew = f;
    for (int h = 0; h < 40; ++h) {
      fnew = objective(b - eta * step);
      if (std::isfinite(fnew) && fnew < f) break;
      eta *= 0.5;
    }
    if (!std::isfinite(fnew)) throw NumericError("fit_logistic: non-finite likelihood");
    if (fnew >= f) break;  // no progress at tiny step: stationary to rounding
    b -= eta * step;
    f = fnew;
  }

  PropensityModel model;
  model.lower = cfg.lower;
  model.upper = cfg.upper;
  model.ridge = cfg.ridge;
  model.converged = converged;
  model.iterations = iter;
  // fold standardization back to the original scale
  model.beta.resize(d + 1);
  model.beta.tail(d) = (b.tail(d).array() / sd.array()).matrix();
  model.beta[0] = b[0] - (b.tail(d).array() * mean.array() / sd.array()).sum();
  if (!model.beta.allFinite()) throw NumericError("fit_logistic: non-finite coefficients");
  return model;
}

RieszWeights riesz_weights(const IntVector& R, const Vector& ps) {
  const Index n = R.size();
  if (ps.size() != n) throw ValidationError("riesz_weights: R and ps lengths disagree");
  RieszWeights w;
  w.w_f.resize(n);
  w.w_c.resize(n);
  for (Index i = 0; i < n; ++i) {
    double p = ps[i];
    if (!(p > 0.0 && p < 1.0))
      throw ValidationError("riesz_weights: propensity " + std::to_string(p) + " at index " +
                            std::to_string(i) + " outside (0,1); truncate upstream");
    if (R[i]) {
      w.w_f[i] = 1.0 / p;
      w.w_c[i] = -1.0 / (1.0 - p);
    } else {
      w.w_f[i] = -1.0 / (1.0 - p);
      w.w_c[i] = 1.0 / p;
    }
  }
  w.m_n = w.w_f.array().abs().mean();
  return w;
}

}  // namespace debias
