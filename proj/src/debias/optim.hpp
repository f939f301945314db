#pragma once

#include <functional>

#include "debias/common.hpp"

namespace debias {

// Objective callback: returns f(x) and writes the gradient into `grad`
// (same size as x). May return +inf / NaN to reject a point.
using ObjectiveFn = std::function<double(const Vector& x, Vector& grad)>;

struct LbfgsConfig {
  int max_iter = 200;
  int memory = 10;
  // convergence when ||g||_inf <= grad_tol * max(1, |f|)
  double grad_tol = 1e-5;
  double f_tol = 1e-10;  // relative objective decrease between iterations
  int max_line_search = 30;
};

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  Vector grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // stopped on grad_tol or f_tol rather than iteration cap
};

// Limited-memory BFGS minimizer with a strong-Wolfe line search
// (c1 = 1e-4, c2 = 0.9). Returns the best point evaluated.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fg, Vector x0, const LbfgsConfig& cfg = {});

}  // namespace debias
