#pragma once

#include <cstdint>
#include <string>

#include "debias/data.hpp"

namespace debias {

enum class Generator { Hom, Het, IhdpB };

std::string generator_name(Generator g);

// A generated benchmark dataset with its ground-truth estimands.
// true_cate is the realized sample-average effect for the drawn features;
// true_ate is the population value (NaN for IHDP-B, where the feature
// distribution is unknown).
struct SimulatedInstance {
  ObservationalDataset data;
  double true_ate = 0.0;
  double true_cate = 0.0;
  Generator generator = Generator::Hom;
  std::uint64_t seed = 0;
};

// The ten component functions of the synthetic benchmark:
// g1 = x-0.5, g2 = (x-0.5)^2+2, g3 = x^2-1/3, g4 = -2 sin(2x),
// g5 = e^-x - e^-1 - 1, g6 = e^-x, g7 = x^2, g8 = x, g9 = 1{x>0}, g10 = cos x.
double g_func(int k, double x);

struct SynthOptions {
  bool noise = true;  // test hook: false zeroes the outcome noise
};

// Synthetic benchmark: X iid N(0,1), treatment assigned deterministically by
// sum_{k<=5} g_k(x_k) > 0, outcome sum_{k<=5} g_{k+5}(x_k) + tau R + eps with
// tau = 1 (Hom) or 1 + 2 x_2 x_5 (Het). Each (unit, feature) cell draws from
// its own seed substream, so noise features beyond the first five never
// perturb the confounders.
SimulatedInstance gen_synthetic(Index n, Index d, Generator mode, std::uint64_t seed,
                                const SynthOptions& opts = {});

struct IhdpOptions {
  bool noise = true;              // test hook
  const Vector* forced_beta = nullptr;  // test hook: bypass the coefficient draw
};

// Semi-synthetic outcomes on user-supplied covariates and real treatment
// assignments: Y(0) ~ N(exp((x+w)'beta), 1), Y(1) ~ N(x'beta - omega, 1)
// with w = (0.5,...,0.5), beta_j drawn from {0,.1,.2,.3,.4} with weights
// (.6,.1,.1,.1,.1), and omega chosen so the realized CATE is exactly 4.
SimulatedInstance gen_ihdp_outcomes(const Matrix& features, const IntVector& R,
                                    std::uint64_t seed, const IhdpOptions& opts = {});

}  // namespace debias
