#include <cmath>

#include "debias/propensity.hpp"
#include "debias/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace debias;

TEST_CASE("constant design recovers the intercept-only MLE") {
  // all-zero feature column: slopes stay 0, intercept = logit(k/n)
  const Index n = 10;
  Matrix X = Matrix::Zero(n, 1);
  IntVector R(n);
  for (Index i = 0; i < n; ++i) R[i] = i < 3 ? 1 : 0;  // k = 3
  LogisticConfig cfg;
  cfg.ridge = 0.0;
  PropensityModel m = fit_logistic(X, R, cfg);
  CHECK(m.converged);
  CHECK(m.beta[1] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(m.beta[0] == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-6));
}

TEST_CASE("separable 1-d data with ridge stays finite and stationary") {
  const Index n = 20;
  Matrix X(n, 1);
  IntVector R(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = (i < 10 ? -1.0 : 1.0) * (0.2 + 0.05 * static_cast<double>(i % 10));
    R[i] = X(i, 0) > 0 ? 1 : 0;
  }
  LogisticConfig cfg;
  cfg.ridge = 1e-3;
  PropensityModel m = fit_logistic(X, R, cfg);
  CHECK(m.beta.allFinite());
  CHECK(m.converged);

  // penalized objective at the fit beats a brute-force grid oracle
  double ours = logistic_objective(X, R, m.beta, cfg.ridge);
  Vector grid = oracle::grid_search_2d(
      [&](double b0, double b1) {
        Vector beta(2);
        beta << b0, b1;
        return logistic_objective(X, R, beta, cfg.ridge);
      },
      -20, 20, -40, 40);
  Vector gbeta(2);
  gbeta << grid[0], grid[1];
  CHECK(ours <= logistic_objective(X, R, gbeta, cfg.ridge) + 1e-8);
}

TEST_CASE("n=4 ridge=1 fit matches the grid-search minimizer") {
  Matrix X(4, 1);
  X << -1.0, -0.5, 0.5, 1.0;
  IntVector R(4);
  R << 0, 0, 1, 1;
  LogisticConfig cfg;
  cfg.ridge = 1.0;
  PropensityModel m = fit_logistic(X, R, cfg);
  Vector grid = oracle::grid_search_2d(
      [&](double b0, double b1) {
        Vector beta(2);
        beta << b0, b1;
        return logistic_objective(X, R, beta, cfg.ridge);
      },
      -3, 3, -3, 3);
  CHECK(std::abs(m.beta[0] - grid[0]) < 1e-3);
  CHECK(std::abs(m.beta[1] - grid[1]) < 1e-3);
}

TEST_CASE("predict_ps clamps to the truncation bounds") {
  PropensityModel m;
  m.beta = Vector::Zero(3);
  Vector x(2);
  x << 5.0, -3.0;
  CHECK(m.predict(x) == 0.5);

  // raw sigmoid above/below the bounds gets truncated
  PropensityModel hi;
  hi.beta = Vector(2);
  hi.beta << std::log(0.95 / 0.05), 0.0;
  Vector x1(1);
  x1 << 0.0;
  CHECK(hi.predict(x1) == doctest::Approx(0.9));
  hi.beta[0] = std::log(0.02 / 0.98);
  CHECK(hi.predict(x1) == doctest::Approx(0.1));

  CHECK_THROWS_AS(m.predict(x1), ValidationError);  // dimension mismatch
}

TEST_CASE("predict_ps bounded for random models and points") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    Index d = 1 + static_cast<Index>(rng.next_u64() % 8);
    PropensityModel m;
    m.beta = oracle::random_vector(rng, d + 1, 5.0);
    double p = m.predict(oracle::random_vector(rng, d, 3.0));
    CHECK(p >= m.lower);
    CHECK(p <= m.upper);
  }
}

TEST_CASE("riesz weights formulas") {
  IntVector R1(1);
  R1 << 1;
  Vector ps1(1);
  ps1 << 0.5;
  RieszWeights w = riesz_weights(R1, ps1);
  CHECK(w.w_f[0] == doctest::Approx(2.0));
  CHECK(w.w_c[0] == doctest::Approx(-2.0));
  CHECK(w.m_n == doctest::Approx(2.0));

  IntVector R0(1);
  R0 << 0;
  Vector ps0(1);
  ps0 << 0.1;
  w = riesz_weights(R0, ps0);
  CHECK(w.w_f[0] == doctest::Approx(-10.0 / 9.0));
  CHECK(w.w_c[0] == doctest::Approx(10.0));
  CHECK(w.m_n == doctest::Approx(10.0 / 9.0));

  Vector bad(1);
  bad << 1.0;
  CHECK_THROWS_AS(riesz_weights(R0, bad), ValidationError);
}

TEST_CASE("riesz weights properties over random draws") {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    Index n = 1 + static_cast<Index>(rng.next_u64() % 30);
    IntVector R(n);
    Vector ps(n);
    for (Index i = 0; i < n; ++i) {
      R[i] = static_cast<int>(rng.next_u64() % 2);
      ps[i] = 0.1 + 0.8 * rng.uniform();  // truncated range
    }
    RieszWeights w = riesz_weights(R, ps);
    double mn_direct = 0.0;
    for (Index i = 0; i < n; ++i) {
      // signs track the treatment label and the pair straddles zero
      CHECK((w.w_f[i] > 0) == (R[i] == 1));
      CHECK((w.w_c[i] > 0) == (R[i] == 0));
      CHECK(w.w_f[i] * w.w_c[i] < 0);
      // magnitudes within the truncation-implied range
      CHECK(std::abs(w.w_f[i]) >= 10.0 / 9.0 - 1e-12);
      CHECK(std::abs(w.w_f[i]) <= 10.0 + 1e-12);
      CHECK(std::abs(w.w_c[i]) <= 10.0 + 1e-12);
      // algebraic identity linking the two weights
      double expect = R[i] == 1 ? -w.w_f[i] * ps[i] / (1.0 - ps[i])
                                : -w.w_f[i] * (1.0 - ps[i]) / ps[i];
      CHECK(w.w_c[i] == doctest::Approx(expect).epsilon(1e-12));
      mn_direct += R[i] == 1 ? 1.0 / ps[i] : 1.0 / (1.0 - ps[i]);
    }
    CHECK(w.m_n == doctest::Approx(mn_direct / static_cast<double>(n)).epsilon(1e-12));
  }
}

TEST_CASE("fit_logistic input validation") {
  Matrix X(2, 1);
  X << 0.0, 1.0;
  IntVector allones(2);
  allones << 1, 1;
  CHECK_THROWS_AS(fit_logistic(X, allones), ValidationError);

  IntVector R(2);
  R << 0, 1;
  LogisticConfig bad;
  bad.ridge = -1.0;
  CHECK_THROWS_AS(fit_logistic(X, R, bad), ValidationError);
}
