#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fptmc/estimate.hpp"
#include "fptmc/model.hpp"

namespace fptmc {

// Historical cumulative default rates at annual-style horizons.
struct HistoricalCurve {
  std::vector<double> times;
  std::vector<double> rates;

  // Throws on structural problems; appends warnings (non-monotone rates)
  // when a warning sink is supplied.
  void validate(std::vector<std::string>* warnings = nullptr) const;
};

// Eq.-style loss between model curves and historical curves:
// sum_i sqrt( sum_j ((P_i(t_j) - hist_i(t_j)) / t_j)^2 ).
double curve_loss(std::span<const RateCurve> model, std::span<const HistoricalCurve> historical);

struct NelderMeadOptions {
  std::size_t max_evaluations = 500;
  double diameter_tol = 1e-5;
  double initial_step = 0.05;  // relative to box width per coordinate
};

struct MinimizeResult {
  std::vector<double> x;
  double fx = 0.0;
  std::size_t evaluations = 0;
  std::vector<std::pair<std::vector<double>, double>> trace;  // every evaluation
};

// Nelder-Mead simplex with box projection. Stops when the simplex diameter
// drops below diameter_tol or the evaluation budget is exhausted; returns
// the best vertex seen.
MinimizeResult minimize(const std::function<double(std::span<const double>)>& loss,
                        std::span<const double> x0, std::span<const double> lower,
                        std::span<const double> upper, const NelderMeadOptions& opts = {});

struct CalibrationSettings {
  std::size_t sim_runs = 20000;      // per objective evaluation
  std::size_t confirm_runs = 100000; // final confirmation run at the optimum
  std::uint64_t seed = 0;            // common random numbers across evaluations
  unsigned workers = 1;
  double interjump_mean = 10.0;      // fixed during calibration
  std::size_t max_evaluations = 500;
  double diameter_tol = 1e-5;
  // Optional per-parameter box overrides (defaults depend on the mode).
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
};

struct CalibrationResult {
  std::vector<std::string> param_names;
  std::vector<double> params;
  double objective_value = 0.0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::vector<double>, double>> trace;

  // Pair mode: derived quantities of the fitted diffusion matrix.
  std::optional<double> sigma1, sigma2, rho12;

  // Confirmation run at the optimum with confirm_runs samples.
  std::vector<RateCurve> confirmed_rates;
  double confirmed_objective = 0.0;
};

// Fixed jump law shared by both firms in the pair calibration.
struct JumpParams {
  double lambda = 0.0;
  double jump_mean = 0.0;
  double jump_sd = 1.0;
};

// Simulation-based objective for a candidate parameter vector. Runs the
// fast engine with the fixed seed (common random numbers), estimates the
// per-firm rate curves and evaluates curve_loss; deterministic given
// (portfolio, sim_runs, seed).
double objective(const PortfolioSpec& portfolio,
                 std::span<const HistoricalCurve> historical, std::size_t sim_runs,
                 std::uint64_t seed, unsigned workers = 1);

// Single-firm calibration over (sigma, lambda, jump_mean, jump_sd) with the
// fixed settings X(0)=2, ln(kappa)=0, gamma=mu=-0.001.
CalibrationResult calibrate_single_firm(const HistoricalCurve& historical,
                                        std::array<double, 4> init,
                                        const CalibrationSettings& settings);

// Pair calibration over the four diffusion loadings (s11, s12, s21, s22)
// with the jump law fixed from a prior single-firm fit; reports the derived
// (sigma1, sigma2, rho12).
CalibrationResult calibrate_pair(const HistoricalCurve& hist_a, const HistoricalCurve& hist_b,
                                 const JumpParams& jumps, std::array<double, 4> init,
                                 const CalibrationSettings& settings);

// Portfolio builders used by the calibration objectives (exposed for tests
// and for generating synthetic curves at known parameters).
PortfolioSpec single_firm_portfolio(double sigma, double lambda, double jump_mean,
                                    double jump_sd, double interjump_mean, double horizon);
PortfolioSpec pair_portfolio(const std::array<double, 4>& loadings, const JumpParams& jumps,
                             double interjump_mean, double horizon);

}  // namespace fptmc
