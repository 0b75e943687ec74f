#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fptmc/unif.hpp"

namespace fptmc {

// Gamma approximation f(t) = alpha^beta / Gamma(beta) * t^(beta-1) exp(-alpha t)
// of a first-passage density, used only to pick the kernel bandwidth.
struct GammaFit {
  double alpha = 1.0;  // rate, > 0
  double beta = 3.0;   // shape, >= 3 (the bandwidth integral needs it)
};

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  std::size_t n_runs = 0;
};

// Cumulative default-rate curve P(t) on a grid; nondecreasing, in [0,1].
struct RateCurve {
  std::vector<double> grid;
  std::vector<double> rates;

  // Linear interpolation; clamps outside the grid range.
  double at(double t) const;
};

struct CorrelationPoint {
  double horizon = 0.0;
  double rho = 0.0;
  double p_a = 0.0;
  double p_b = 0.0;
  double p_ab = 0.0;
  double stderr_rho = 0.0;
  bool defined = true;  // false when either marginal probability is 0 or 1
};

struct CorrelationReport {
  std::size_t firm_a = 0;
  std::size_t firm_b = 1;
  std::vector<CorrelationPoint> points;
};

// Weighted method-of-moments gamma fit; beta is clamped up to 3 (with alpha
// recomputed to preserve the weighted mean) when the raw estimate is lower.
GammaFit fit_gamma(std::span<const double> times, std::span<const double> weights);

// Closed form of integral (f'')^2 dt for the gamma density; finite for beta >= 3.
double bandwidth_integral(const GammaFit& fit);

// h = (2 N sqrt(pi) integral (f'')^2)^(-1/5) with N the number of samples.
double optimal_bandwidth(const GammaFit& fit, std::size_t n_samples);

// Weighted Gaussian-kernel density on the grid, normalized by the number of
// Monte Carlo runs (runs without a sample contribute zero density).
// The kernel is exp(-u^2/(h^2/2)) / (sqrt(pi/2) h).
DensityEstimate kde(std::span<const double> times, std::span<const double> weights, double h,
                    std::span<const double> grid, std::size_t n_runs);

// Trapezoidal cumulative integral of the density, clamped to [0,1].
RateCurve cumulative_rates(const DensityEstimate& density);

// Pairwise default correlation at horizon t from run-level default
// indicators, with a delta-method standard error.
CorrelationPoint default_correlation(const SampleSet& set, std::size_t firm_a,
                                     std::size_t firm_b, double t);

// n evenly spaced points on [0, horizon] including both endpoints.
std::vector<double> uniform_grid(double horizon, std::size_t n = 512);

// Full per-firm pipeline: collect weighted samples, gamma-fit the bandwidth,
// run the KDE and integrate the rates. Fewer than two samples yield the zero
// density (bandwidth 0).
struct FirmEstimate {
  DensityEstimate density;
  RateCurve rates;
  GammaFit fit;
  std::size_t n_samples = 0;
};
FirmEstimate estimate_firm(const SampleSet& set, std::size_t firm,
                           std::span<const double> grid);

}  // namespace fptmc
