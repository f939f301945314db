#include "debias/simgen.hpp"

#include <cmath>

#include "debias/rng.hpp"

namespace debias {

namespace {

// stream tags for the keyed substreams
constexpr std::uint64_t kFeatureStream = 0xF0;
constexpr std::uint64_t kNoiseStream = 0xE0;
constexpr std::uint64_t kBetaStream = 0xB0;

double cell_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  Rng r(mix(mix(seed, stream), mix(a, b)));
  return r.normal();
}

}  // namespace

std::string generator_name(Generator g) {
  switch (g) {
    case Generator::Hom: return "HOM";
    case Generator::Het: return "HET";
    case Generator::IhdpB: return "IHDP-B";
  }
  return "?";
}

double g_func(int k, double x) {
  switch (k) {
    case 1: return x - 0.5;
    case 2: return (x - 0.5) * (x - 0.5) + 2.0;
    case 3: return x * x - 1.0 / 3.0;
    case 4: return -2.0 * std::sin(2.0 * x);
    case 5: return std::exp(-x) - std::exp(-1.0) - 1.0;
    case 6: return std::exp(-x);
    case 7: return x * x;
    case 8: return x;
    case 9: return x > 0 ? 1.0 : 0.0;
    case 10: return std::cos(x);
  }
  throw ValidationError("g_func: index must be in 1..10");
}

SimulatedInstance gen_synthetic(Index n, Index d, Generator mode, std::uint64_t seed,
                                const SynthOptions& opts) {
  if (mode != Generator::Hom && mode != Generator::Het)
    throw ValidationError("gen_synthetic: mode must be HOM or HET");
  if (d < 5) throw ValidationError("gen_synthetic: need d >= 5 features");
  if (n < 2) throw ValidationError("gen_synthetic: need n >= 2");

  Matrix X(n, d);
  for (Index i = 0; i < d; ++i)
    for (Index u = 0; u < n; ++u)
      X(u, i) = cell_normal(seed, kFeatureStream, static_cast<std::uint64_t>(u),
                            static_cast<std::uint64_t>(i));

  IntVector R(n);
  Vector Y(n);
  double tau_sum = 0.0;
  for (Index u = 0; u < n; ++u) {
    double assign = 0.0, base = 0.0;
    for (int k = 1; k <= 5; ++k) {
      assign += g_func(k, X(u, k - 1));
      base += g_func(k + 5, X(u, k - 1));
    }
    R[u] = assign > 0.0 ? 1 : 0;
    double tau = mode == Generator::Hom ? 1.0 : 1.0 + 2.0 * X(u, 1) * X(u, 4);
    tau_sum += tau;
    double eps = opts.noise ? cell_normal(seed, kNoiseStream, static_cast<std::uint64_t>(u), 0) : 0.0;
    Y[u] = base + tau * static_cast<double>(R[u]) + eps;
  }

  SimulatedInstance inst;
  inst.data = make_dataset(std::move(X), std::move(R), std::move(Y));
  inst.true_ate = 1.0;
  inst.true_cate = mode == Generator::Hom ? 1.0 : tau_sum / static_cast<double>(n);
  inst.generator = mode;
  inst.seed = seed;
  return inst;
}

SimulatedInstance gen_ihdp_outcomes(const Matrix& features, const IntVector& R,
                                    std::uint64_t seed, const IhdpOptions& opts) {
  const Index n = features.rows();
  const Index d = features.cols();
  if (n == 0 || d == 0) throw ValidationError("gen_ihdp_outcomes: empty feature matrix");
  if (R.size() != n) throw ValidationError("gen_ihdp_outcomes: treatment length mismatch");

  Vector beta(d);
  if (opts.forced_beta) {
    if (opts.forced_beta->size() != d)
      throw ValidationError("gen_ihdp_outcomes: forced beta length mismatch");
    beta = *opts.forced_beta;
  } else {
    for (Index j = 0; j < d; ++j) {
      Rng r(mix(mix(seed, kBetaStream), static_cast<std::uint64_t>(j)));
      double u = r.uniform();
      if (u < 0.6)
        beta[j] = 0.0;
      else if (u < 0.7)
        beta[j] = 0.1;
      else if (u < 0.8)
        beta[j] = 0.2;
      else if (u < 0.9)
        beta[j] = 0.3;
      else
        beta[j] = 0.4;
    }
  }

  // mean surfaces: m0 = exp((x+w)'beta) with w = 0.5, m1 = x'beta - omega
  Vector xb = features * beta;
  Vector m0 = (xb.array() + 0.5 * beta.sum()).exp();
  const double omega = (xb - m0).mean() - 4.0;  // forces realized CATE = 4

  Vector Y(n);
  for (Index u = 0; u < n; ++u) {
    double mean = R[u] ? xb[u] - omega : m0[u];
    double eps = opts.noise ? cell_normal(seed, kNoiseStream, static_cast<std::uint64_t>(u), 1) : 0.0;
    Y[u] = mean + eps;
  }

  SimulatedInstance inst;
  inst.data = make_dataset(features, R, std::move(Y));
  inst.true_ate = std::numeric_limits<double>::quiet_NaN();
  inst.true_cate = 4.0;
  inst.generator = Generator::IhdpB;
  inst.seed = seed;
  return inst;
}

}  // namespace debias
