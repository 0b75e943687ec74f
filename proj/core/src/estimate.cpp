#include "fptmc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fptmc/errors.hpp"

namespace fptmc {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double RateCurve::at(double t) const {
  if (grid.empty()) return 0.0;
  if (t <= grid.front()) return rates.front();
  if (t >= grid.back()) return rates.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return rates[lo] + w * (rates[hi] - rates[lo]);
}

GammaFit fit_gamma(std::span<const double> times, std::span<const double> weights) {
  if (times.size() != weights.size())
    throw std::invalid_argument("fit_gamma: times/weights size mismatch");
  if (times.size() < 2) throw numeric_error("fit_gamma: at least 2 samples required");

  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("fit_gamma: negative weight");
    wsum += weights[i];
    mean += weights[i] * times[i];
  }
  if (!(wsum > 0.0)) throw numeric_error("fit_gamma: total weight must be positive");
  mean /= wsum;

  double var = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = times[i] - mean;
    var += weights[i] * d * d;
  }
  var /= wsum;
  if (!(var > 0.0)) throw numeric_error("fit_gamma: zero sample variance");

  GammaFit fit;
  fit.beta = mean * mean / var;
  fit.alpha = mean / var;
  if (fit.beta < 3.0) {
    // Clamp the shape and keep the fitted mean beta/alpha.
    fit.beta = 3.0;
    fit.alpha = 3.0 / mean;
  }
  return fit;
}

double bandwidth_integral(const GammaFit& fit) {
  const double alpha = fit.alpha;
  const double beta = fit.beta;
  if (!(alpha > 0.0)) throw std::invalid_argument("bandwidth_integral: alpha must be > 0");
  if (!(beta >= 3.0)) throw std::invalid_argument("bandwidth_integral: beta must be >= 3");

  // (f'')^2 expands to e^(-2 alpha t) t^(2 beta - 6) (A t^2 + B t + C)^2 up to
  // the squared normalizer; each monomial integrates to a Gamma function.
  const double a = alpha * alpha;
  const double b = -2.0 * alpha * (beta - 1.0);
  const double c = (beta - 1.0) * (beta - 2.0);
  const double w[5] = {a * a, 2.0 * a * b, b * b + 2.0 * a * c, 2.0 * b * c, c * c};

  // Assembled in log space: terms can overflow double for large beta even
  // though their signed sum stays modest.
  const double log_gamma_beta = std::lgamma(beta);
  double total = 0.0;
  for (int i = 1; i <= 5; ++i) {
    if (w[i - 1] == 0.0) continue;
    const double log_mag = i * std::log(alpha) + std::log(std::abs(w[i - 1])) +
                           std::lgamma(2.0 * beta - i) -
                           (2.0 * beta - i) * std::numbers::ln2 - 2.0 * log_gamma_beta;
    total += std::copysign(std::exp(log_mag), w[i - 1]);
  }
  return total;
}

double optimal_bandwidth(const GammaFit& fit, std::size_t n_samples) {
  if (n_samples < 1) throw std::invalid_argument("optimal_bandwidth: n_samples must be >= 1");
  const double integral = bandwidth_integral(fit);
  return std::pow(2.0 * static_cast<double>(n_samples) * std::sqrt(kPi) * integral, -0.2);
}

DensityEstimate kde(std::span<const double> times, std::span<const double> weights, double h,
                    std::span<const double> grid, std::size_t n_runs) {
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
  if (n_runs < 1) throw std::invalid_argument("kde: n_runs must be >= 1");
  if (times.size() != weights.size())
    throw std::invalid_argument("kde: times/weights size mismatch");

  DensityEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(grid.size(), 0.0);
  out.bandwidth = h;
  out.n_runs = n_runs;

  const double norm = 1.0 / (std::sqrt(kPi / 2.0) * h);
  const double inv_h2 = 2.0 / (h * h);  // kernel exponent scale: u^2 / (h^2/2)
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double u = grid[k] - times[i];
      acc += weights[i] * std::exp(-u * u * inv_h2);
    }
    out.values[k] = acc * norm / static_cast<double>(n_runs);
  }
  return out;
}

RateCurve cumulative_rates(const DensityEstimate& density) {
  RateCurve curve;
  curve.grid = density.grid;
  curve.rates.assign(density.grid.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < density.grid.size(); ++k) {
    const double dt = density.grid[k] - density.grid[k - 1];
    acc += 0.5 * dt * (density.values[k] + density.values[k - 1]);
    curve.rates[k] = std::clamp(acc, curve.rates[k - 1], 1.0);
  }
  return curve;
}

CorrelationPoint default_correlation(const SampleSet& set, std::size_t firm_a,
                                     std::size_t firm_b, double t) {
  const std::size_t n = set.n_runs();
  if (n == 0) throw std::invalid_argument("default_correlation: empty sample set");
  if (firm_a == firm_b) throw std::invalid_argument("default_correlation: firms must differ");

  std::size_t ca = 0, cb = 0, cab = 0;
  for (const RunOutcome& run : set.outcomes) {
    const auto ta = run.default_time(firm_a);
    const auto tb = run.default_time(firm_b);
    const bool da = ta && *ta <= t;
    const bool db = tb && *tb <= t;
    ca += da;
    cb += db;
    cab += da && db;
  }

  CorrelationPoint pt;
  pt.horizon = t;
  const double nn = static_cast<double>(n);
  pt.p_a = ca / nn;
  pt.p_b = cb / nn;
  pt.p_ab = cab / nn;

  const double qa = 1.0 - pt.p_a, qb = 1.0 - pt.p_b;
  const double denom = std::sqrt(pt.p_a * qa * pt.p_b * qb);
  if (denom == 0.0) {
    pt.defined = false;
    pt.rho = std::numeric_limits<double>::quiet_NaN();
    pt.stderr_rho = std::numeric_limits<double>::quiet_NaN();
    return pt;
  }
  pt.rho = (pt.p_ab - pt.p_a * pt.p_b) / denom;

  // Delta method on the multinomial indicator frequencies (I_A, I_B, I_AB).
  const double d_ab = 1.0 / denom;
  const double d_a = (-pt.p_b - pt.rho * denom * (1.0 - 2.0 * pt.p_a) / (2.0 * pt.p_a * qa)) / denom;
  const double d_b = (-pt.p_a - pt.rho * denom * (1.0 - 2.0 * pt.p_b) / (2.0 * pt.p_b * qb)) / denom;

  const double var_a = pt.p_a * qa;
  const double var_b = pt.p_b * qb;
  const double var_ab = pt.p_ab * (1.0 - pt.p_ab);
  const double cov_a_b = pt.p_ab - pt.p_a * pt.p_b;
  const double cov_a_ab = pt.p_ab * (1.0 - pt.p_a);
  const double cov_b_ab = pt.p_ab * (1.0 - pt.p_b);

  double var = d_a * d_a * var_a + d_b * d_b * var_b + d_ab * d_ab * var_ab +
               2.0 * d_a * d_b * cov_a_b + 2.0 * d_a * d_ab * cov_a_ab +
               2.0 * d_b * d_ab * cov_b_ab;
  pt.stderr_rho = std::sqrt(std::max(var, 0.0) / nn);
  return pt;
}

std::vector<double> uniform_grid(double horizon, std::size_t n) {
  if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

FirmEstimate estimate_firm(const SampleSet& set, std::size_t firm,
                           std::span<const double> grid) {
  std::vector<double> times, weights;
  for (const RunOutcome& run : set.outcomes) {
    if (run.samples[firm]) {
      times.push_back(run.samples[firm]->time);
      weights.push_back(run.samples[firm]->weight);
    }
  }

  FirmEstimate est;
  est.n_samples = times.size();
  if (times.size() < 2) {
    est.density.grid.assign(grid.begin(), grid.end());
    est.density.values.assign(grid.size(), 0.0);
    est.density.bandwidth = 0.0;
    est.density.n_runs = set.n_runs();
    est.rates = cumulative_rates(est.density);
    return est;
  }

  est.fit = fit_gamma(times, weights);
  const double h = optimal_bandwidth(est.fit, times.size());
  est.density = kde(times, weights, h, grid, set.n_runs());
  est.rates = cumulative_rates(est.density);
  return est;
}

}  // namespace fptmc
