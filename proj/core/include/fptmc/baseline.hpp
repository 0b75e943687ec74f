#pragma once

#include <cstdint>

#include "fptmc/estimate.hpp"
#include "fptmc/unif.hpp"

namespace fptmc {

struct EulerConfig {
  double dt = 0.005;
  std::size_t n_runs = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;  // 0 selects the hardware concurrency
};

// Conventional discretized Monte Carlo: advances every firm on the fixed
// grid with correlated Gaussian increments, applies timeline jumps at the
// first grid point at or after each jump instant, and records the first
// grid time a firm's value sits at or below its boundary (weight-1 samples).
// Crossing detection is grid-point-only by design; this is the naive method
// the fast engine is compared against.
SampleSet euler_simulate(const PortfolioSpec& portfolio, const EulerConfig& cfg);

// No-jump closed form: P(t) = 2 Phi(-z / sqrt(t)) for the standardized
// distance to default z > 0.
double nojump_default_probability(double z, double t);

struct DistanceFit {
  double z = 0.0;
  bool saturated = false;  // hit the search bracket (e.g. all-zero rates)
};

// Fits z by golden-section search on sum_t ((P(z,t) - rate(t)) / t)^2 over
// the curve's grid points, to absolute tolerance 1e-4 in z.
DistanceFit fit_distance_to_default(const RateCurve& historical);

}  // namespace fptmc
