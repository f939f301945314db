// Test-only reference implementations, kept independent of the library's
// computation paths: kernels are evaluated entry by entry from the formula
// and linear systems are solved with explicit dense inverses.
#pragma once

#include <cmath>
#include <functional>

#include "debias/common.hpp"
#include "debias/rng.hpp"

namespace oracle {

using debias::Index;
using debias::Matrix;
using debias::Vector;

inline double se_entry(const Vector& ell, double rho2, const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    double d = (a[i] - b[i]) / ell[i];
    s += d * d;
  }
  return rho2 * std::exp(-0.5 * s);
}

inline Matrix gram(const Vector& ell, double rho2, const Matrix& A, const Matrix& B, double nu,
                   const Vector& wA, const Vector& wB) {
  Matrix K(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.rows(); ++j)
      K(i, j) = se_entry(ell, rho2, A.row(i), B.row(j)) + nu * nu * wA[i] * wB[j];
  return K;
}

struct DensePosterior {
  Vector mu;
  Matrix sigma;
};

// Direct transcription of the predictive-moment equations with an explicit
// matrix inverse. Mirrors the library's constant initial diagonal jitter of
// 1e-8 * mean(diag).
inline DensePosterior posterior(const Vector& ell, double rho2, double s2, double nu,
                                const Matrix& Z, const Matrix& Zstar, const Vector& Y,
                                const Vector& wf, const Vector& wc) {
  const Index n = Z.rows();
  Vector wstar(2 * n);
  wstar.head(n) = wf;
  wstar.tail(n) = wc;
  Matrix Ky = gram(ell, rho2, Z, Z, nu, wf, wf);
  for (Index i = 0; i < n; ++i) Ky(i, i) += s2;
  Ky.diagonal().array() += 1e-8 * Ky.diagonal().mean();
  Matrix Kinv = Ky.inverse();
  Matrix Kbar = gram(ell, rho2, Zstar, Z, nu, wstar, wf);
  DensePosterior out;
  out.mu = Kbar * Kinv * Y;
  out.sigma = gram(ell, rho2, Zstar, Zstar, nu, wstar, wstar) - Kbar * Kinv * Kbar.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  return out;
}

// Dense log marginal likelihood via explicit inverse and log-determinant.
inline double lml(const Vector& ell, double rho2, double s2, const Matrix& Z, const Vector& Y) {
  const Index n = Z.rows();
  Vector zero = Vector::Zero(n);
  Matrix Ky = gram(ell, rho2, Z, Z, 0.0, zero, zero);
  for (Index i = 0; i < n; ++i) Ky(i, i) += s2;
  Ky.diagonal().array() += 1e-8 * Ky.diagonal().mean();
  double quad = Y.dot(Ky.inverse() * Y);
  double logdet = std::log(Ky.determinant());
  return -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
}

// Central finite differences of a scalar function.
inline Vector finite_diff(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Refining dense grid search for a 2-parameter minimization.
inline Vector grid_search_2d(const std::function<double(double, double)>& f, double lo0, double hi0,
                             double lo1, double hi1, int levels = 6, int steps = 60) {
  double best0 = 0, best1 = 0, bestf = std::numeric_limits<double>::infinity();
  for (int level = 0; level < levels; ++level) {
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        double a = lo0 + (hi0 - lo0) * i / steps;
        double b = lo1 + (hi1 - lo1) * j / steps;
        double v = f(a, b);
        if (v < bestf) {
          bestf = v;
          best0 = a;
          best1 = b;
        }
      }
    }
    double span0 = (hi0 - lo0) / steps * 2.5;
    double span1 = (hi1 - lo1) / steps * 2.5;
    lo0 = best0 - span0;
    hi0 = best0 + span0;
    lo1 = best1 - span1;
    hi1 = best1 + span1;
  }
  Vector out(2);
  out << best0, best1;
  return out;
}

// Random helpers for property tests.
inline Matrix random_matrix(debias::Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline Vector random_vector(debias::Rng& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace oracle
