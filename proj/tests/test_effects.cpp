#include <cmath>

#include "debias/effects.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace debias;

TEST_CASE("dirichlet weights basics") {
  Rng rng(3);
  Vector w1 = dirichlet_weights(1, rng);
  CHECK(w1.size() == 1);
  CHECK(w1[0] == 1.0);

  for (int t = 0; t < 50; ++t) {
    Index n = 1 + static_cast<Index>(rng.next_u64() % 50);
    Vector w = dirichlet_weights(n, rng);
    CHECK((w.array() > 0).all());
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dirichlet weights match Beta moments") {
  // coordinates of Dir(5;1,..,1) are Beta(1,4): mean 0.2, var 4/150
  Rng rng(5);
  const int draws = 100000;
  const Index n = 5;
  Vector mean = Vector::Zero(n), m2 = Vector::Zero(n);
  for (int t = 0; t < draws; ++t) {
    Vector w = dirichlet_weights(n, rng);
    mean += w;
    m2 += w.cwiseProduct(w);
  }
  mean /= draws;
  m2 /= draws;
  for (Index i = 0; i < n; ++i) {
    double var = m2[i] - mean[i] * mean[i];
    CHECK(std::abs(mean[i] - 0.2) < 0.003);
    CHECK(std::abs(var - 4.0 / 150.0) < 0.1 * 4.0 / 150.0);
  }
}

TEST_CASE("posterior mean of the effect") {
  // constant treated/control values give the shift
  IntVector R(3);
  R << 1, 0, 1;
  Vector mu(6);
  // treated-value rows: factual of units 0,2 and counterfactual of unit 1
  double c = 2.0, delta = 0.7;
  mu << c + delta, c, c + delta, c, c + delta, c;
  CHECK(posterior_mean_ate(mu, R) == doctest::Approx(delta));

  IntVector R2(2);
  R2 << 1, 0;
  Vector mu2(4);
  mu2 << 3, 5, 1, 4;
  CHECK(posterior_mean_ate(mu2, R2) == doctest::Approx(0.5));

  Vector odd(5);
  CHECK_THROWS_AS(posterior_mean_ate(odd, R2), ValidationError);
}

TEST_CASE("degenerate covariance collapses draws onto the mean") {
  IntVector R(2);
  R << 1, 0;
  PosteriorMoments mom;
  mom.mu = Vector(4);
  mom.mu << 1.0, 2.0, 0.25, 1.5;
  mom.sigma = Matrix::Zero(4, 4);

  EffectPosterior plug = sample_effect_posterior(mom, R, 100, false, 7, 0.5);
  CHECK((plug.draws.array() == plug.post_mean).all());

  // constant contrast delta: randomized draws also collapse (weights sum to 1)
  PosteriorMoments momc;
  momc.mu = Vector(4);
  double delta = 0.8;
  momc.mu << 1.0 + delta, 2.0, 1.0, 2.0 + delta;
  momc.sigma = Matrix::Zero(4, 4);
  EffectPosterior rand = sample_effect_posterior(momc, R, 100, true, 7, 0.5);
  CHECK(rand.post_mean == doctest::Approx(delta));
  for (Index i = 0; i < rand.draws.size(); ++i)
    CHECK(rand.draws[i] == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("randomized and plug-in modes share the analytic mean; bootstrap widens") {
  Rng rng(11);
  int wider = 0;
  for (int s = 0; s < 10; ++s) {
    const Index n = 6;
    Matrix A = oracle::random_matrix(rng, 2 * n, 2 * n, 0.4);
    PosteriorMoments mom;
    mom.sigma = A * A.transpose();
    mom.mu = oracle::random_vector(rng, 2 * n, 1.0);
    mom.mu.array() += 1.0;
    IntVector R(n);
    for (Index i = 0; i < n; ++i) R[i] = static_cast<int>(rng.next_u64() % 2);

    EffectPosterior a = sample_effect_posterior(mom, R, 2000, true, 100 + s);
    EffectPosterior b = sample_effect_posterior(mom, R, 2000, false, 100 + s);
    CHECK(a.post_mean == b.post_mean);  // exact: both read mu only

    auto var_of = [](const Vector& v) {
      double m = v.mean();
      return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
    };
    if (var_of(a.draws) >= 0.95 * var_of(b.draws)) ++wider;
  }
  CHECK(wider == 10);
}

TEST_CASE("plug-in draw average approaches the analytic mean") {
  Rng rng(13);
  const Index n = 5;
  Matrix A = oracle::random_matrix(rng, 2 * n, 2 * n, 0.3);
  PosteriorMoments mom;
  mom.sigma = A * A.transpose();
  mom.mu = oracle::random_vector(rng, 2 * n);
  IntVector R(n);
  R << 1, 0, 1, 1, 0;
  const Index P = 20000;
  EffectPosterior e = sample_effect_posterior(mom, R, P, false, 17);
  double sd = std::sqrt((e.draws.array() - e.draws.mean()).square().sum() / (P - 1.0));
  CHECK(std::abs(e.draws.mean() - e.post_mean) < 3.0 * sd / std::sqrt(static_cast<double>(P)));
}

TEST_CASE("credible interval endpoints and monotonicity in alpha") {
  IntVector R(1);
  R << 1;
  PosteriorMoments mom;
  mom.mu = Vector::Zero(2);
  mom.sigma = Matrix::Identity(2, 2);

  EffectPosterior e = sample_effect_posterior(mom, R, 10, false, 3, 0.5);
  Vector sorted = e.draws;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  CHECK(e.ci_low == doctest::Approx(empirical_quantile(sorted, 0.25)));
  CHECK(e.ci_high == doctest::Approx(empirical_quantile(sorted, 0.75)));

  double prev_lo = e.ci_low, prev_hi = e.ci_high;
  for (double alpha : {0.4, 0.3, 0.2}) {
    EffectPosterior w = sample_effect_posterior(mom, R, 10, false, 3, alpha);
    CHECK(w.ci_low <= prev_lo + 1e-12);
    CHECK(w.ci_high >= prev_hi - 1e-12);
    prev_lo = w.ci_low;
    prev_hi = w.ci_high;
  }

  // P too small for the requested tail
  CHECK_THROWS_AS(sample_effect_posterior(mom, R, 10, false, 3, 0.05), ValidationError);
  CHECK_THROWS_AS(sample_effect_posterior(mom, R, 1, false, 3, 0.5), ValidationError);
}

namespace {

ObservationalDataset linear_data(Index n, double effect, bool noise, Rng& rng) {
  Matrix X(n, 1);
  IntVector R(n);
  Vector Y(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    R[i] = i % 2;
    Y[i] = X(i, 0) + effect * R[i] + (noise ? 0.1 * rng.normal() : 0.0);
  }
  return make_dataset(X, R, Y);
}

}  // namespace

TEST_CASE("ols recovers an exact linear truth") {
  Rng rng(17);
  auto data = linear_data(40, 2.0, false, rng);
  BaselineEstimate est = ols_ate(data);
  CHECK(est.estimate == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(est.ci_low <= est.estimate);
  CHECK(est.ci_high >= est.estimate);

  // zero outcome: estimate 0 with an interval containing 0
  Matrix X = data.X;
  auto zero = make_dataset(X, data.R, Vector::Zero(40));
  BaselineEstimate z = ols_ate(zero);
  CHECK(z.estimate == doctest::Approx(0.0));
  CHECK(z.ci_low <= 0.0);
  CHECK(z.ci_high >= 0.0);
}

TEST_CASE("ols matches a dense normal-equations oracle") {
  Rng rng(19);
  const Index n = 10;
  Matrix X(n, 2);
  IntVector R(n);
  Vector Y(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    R[i] = i < 4 ? 1 : 0;
    Y[i] = 0.5 * X(i, 0) - X(i, 1) + 1.5 * R[i] + 0.3 * rng.normal();
  }
  auto data = make_dataset(X, R, Y);
  BaselineEstimate est = ols_ate(data);

  // oracle: per-group (A'A)^-1 A'y with explicit inverses
  auto group_coef = [&](int label) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (R[i] == label) idx.push_back(i);
    Matrix A(static_cast<Index>(idx.size()), 3);
    Vector y(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      A(static_cast<Index>(k), 0) = 1.0;
      A(static_cast<Index>(k), 1) = X(idx[k], 0);
      A(static_cast<Index>(k), 2) = X(idx[k], 1);
      y[static_cast<Index>(k)] = Y[idx[k]];
    }
    return Vector((A.transpose() * A).inverse() * A.transpose() * y);
  };
  Vector b1 = group_coef(1), b0 = group_coef(0);
  double expect = 0.0;
  for (Index i = 0; i < n; ++i) {
    expect += (b1[0] + b1[1] * X(i, 0) + b1[2] * X(i, 1)) -
              (b0[0] + b0[1] * X(i, 0) + b0[2] * X(i, 1));
  }
  expect /= static_cast<double>(n);
  CHECK(est.estimate == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("ols requires enough units per group") {
  Rng rng(23);
  Matrix X(5, 2);
  IntVector R(5);
  Vector Y(5);
  for (Index i = 0; i < 5; ++i) {
    X.row(i) << rng.normal(), rng.normal();
    R[i] = i == 0 ? 1 : 0;
    Y[i] = rng.normal();
  }
  CHECK_THROWS_AS(ols_ate(make_dataset(X, R, Y)), ValidationError);
}

TEST_CASE("ipw on a balanced constant-propensity design") {
  const Index n = 20;
  Matrix X = Matrix::Zero(n, 1);
  IntVector R(n);
  Vector Y(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = static_cast<double>(i);
    R[i] = i < n / 2 ? 1 : 0;
    Y[i] = static_cast<double>(R[i]);  // Y = R
  }
  auto data = make_dataset(X, R, Y);
  Vector ps = Vector::Constant(n, 0.5);
  BaselineEstimate est = ipw_ate(data, ps);
  // mean of R_i Y_i / 0.5 over all units = 2 * (treated fraction) = 1
  CHECK(est.estimate == doctest::Approx(1.0));

  BaselineEstimate z = ipw_ate(make_dataset(data.X, R, Vector::Zero(n)), ps);
  CHECK(z.estimate == 0.0);

  Vector bad = ps;
  bad[0] = 0.0;
  CHECK_THROWS_AS(ipw_ate(data, bad), ValidationError);
}

TEST_CASE("ipw is unbiased under the true propensity") {
  // randomized assignment with known pi(x); Monte-Carlo mean within 3 SE
  Rng rng(29);
  const int reps = 10000;
  const Index n = 40;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Matrix X(n, 1);
    IntVector R(n);
    Vector Y(n), ps(n);
    for (Index i = 0; i < n; ++i) {
      X(i, 0) = rng.normal();
      double p = 0.25 + 0.5 / (1.0 + std::exp(-X(i, 0)));
      ps[i] = p;
      R[i] = rng.uniform() < p ? 1 : 0;
      Y[i] = X(i, 0) + 2.0 * R[i];  // true effect 2, no noise needed
    }
    if ((R.array() == 1).count() == 0 || (R.array() == 0).count() == 0) continue;
    double est = ipw_ate(make_dataset(X, R, Y), ps).estimate;
    sum += est;
    sum2 += est * est;
  }
  double mean = sum / reps;
  double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 2.0) < 3.0 * se);
}

TEST_CASE("normal quantile sanity") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-8));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-8));
}
