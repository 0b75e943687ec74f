#include "fptmc/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fptmc/errors.hpp"
#include "fptmc/unif.hpp"

namespace fptmc {

void HistoricalCurve::validate(std::vector<std::string>* warnings) const {
  if (times.empty()) throw std::invalid_argument("historical curve: empty");
  if (times.size() != rates.size())
    throw std::invalid_argument("historical curve: times/rates size mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0))
      throw std::invalid_argument("historical curve: times must be > 0");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("historical curve: times must be strictly increasing");
    if (rates[i] < 0.0 || rates[i] > 1.0)
      throw std::invalid_argument("historical curve: rates must lie in [0,1]");
    if (warnings && i > 0 && rates[i] < rates[i - 1] - 1e-12) {
      std::ostringstream os;
      os << "historical rates decrease at t=" << times[i]
         << " (kept as provided; treated as statistical noise)";
      warnings->push_back(os.str());
    }
  }
}

double curve_loss(std::span<const RateCurve> model, std::span<const HistoricalCurve> historical) {
  if (model.size() != historical.size())
    throw std::invalid_argument("curve_loss: model/historical count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < historical[i].times.size(); ++j) {
      const double t = historical[i].times[j];
      const double d = (model[i].at(t) - historical[i].rates[j]) / t;
      acc += d * d;
    }
    total += std::sqrt(acc);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Nelder-Mead with box projection.
// ---------------------------------------------------------------------------

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& xs) {
  double diam = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < xs[i].size(); ++k) {
        const double d = xs[i][k] - xs[j][k];
        d2 += d * d;
      }
      diam = std::max(diam, std::sqrt(d2));
    }
  return diam;
}

}  // namespace

MinimizeResult minimize(const std::function<double(std::span<const double>)>& loss,
                        std::span<const double> x0, std::span<const double> lower,
                        std::span<const double> upper, const NelderMeadOptions& opts) {
  const std::size_t dim = x0.size();
  if (lower.size() != dim || upper.size() != dim)
    throw std::invalid_argument("minimize: bound size mismatch");
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(lower[k] <= upper[k])) throw std::invalid_argument("minimize: lower > upper");
    if (x0[k] < lower[k] || x0[k] > upper[k])
      throw std::invalid_argument("minimize: x0 outside the box");
  }

  MinimizeResult result;
  auto project = [&](std::vector<double>& x) {
    for (std::size_t k = 0; k < dim; ++k) x[k] = std::clamp(x[k], lower[k], upper[k]);
  };
  auto eval = [&](const std::vector<double>& x) {
    const double f = loss(std::span<const double>(x));
    result.trace.emplace_back(x, f);
    ++result.evaluations;
    return f;
  };

  // Initial simplex: x0 plus one step along each coordinate, scaled to the
  // box width (or |x0| for an unbounded-feeling coordinate).
  std::vector<std::vector<double>> xs(dim + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t k = 0; k < dim; ++k) {
    double width = upper[k] - lower[k];
    if (!std::isfinite(width) || width <= 0.0) width = std::max(1.0, std::abs(x0[k]));
    double step = opts.initial_step * width;
    if (xs[k + 1][k] + step > upper[k]) step = -step;
    xs[k + 1][k] += step;
    project(xs[k + 1]);
  }
  std::vector<double> fs(dim + 1);
  for (std::size_t v = 0; v <= dim; ++v) fs[v] = eval(xs[v]);
  if (!std::isfinite(fs[0]))
    throw numeric_error("minimize: objective is not finite at the initial point");

  const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;
  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

  while (result.evaluations < opts.max_evaluations) {
    // Order vertices by objective value.
    std::vector<std::size_t> idx(dim + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> xs2(dim + 1);
    std::vector<double> fs2(dim + 1);
    for (std::size_t v = 0; v <= dim; ++v) {
      xs2[v] = xs[idx[v]];
      fs2[v] = fs[idx[v]];
    }
    xs.swap(xs2);
    fs.swap(fs2);

    if (simplex_diameter(xs) < opts.diameter_tol) break;

    for (std::size_t k = 0; k < dim; ++k) {
      double c = 0.0;
      for (std::size_t v = 0; v < dim; ++v) c += xs[v][k];
      centroid[k] = c / static_cast<double>(dim);
    }

    for (std::size_t k = 0; k < dim; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - xs[dim][k]);
    project(xr);
    const double fr = eval(xr);

    if (fr < fs[0]) {
      for (std::size_t k = 0; k < dim; ++k) xe[k] = centroid[k] + gamma * (xr[k] - centroid[k]);
      project(xe);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[dim] = xe;
        fs[dim] = fe;
      } else {
        xs[dim] = xr;
        fs[dim] = fr;
      }
    } else if (fr < fs[dim - 1]) {
      xs[dim] = xr;
      fs[dim] = fr;
    } else {
      const bool outside = fr < fs[dim];
      if (outside) {
        for (std::size_t k = 0; k < dim; ++k) xc[k] = centroid[k] + beta * (xr[k] - centroid[k]);
      } else {
        for (std::size_t k = 0; k < dim; ++k) xc[k] = centroid[k] + beta * (xs[dim][k] - centroid[k]);
      }
      project(xc);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fs[dim])) {
        xs[dim] = xc;
        fs[dim] = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t v = 1; v <= dim; ++v) {
          for (std::size_t k = 0; k < dim; ++k)
            xs[v][k] = xs[0][k] + delta * (xs[v][k] - xs[0][k]);
          project(xs[v]);
          fs[v] = eval(xs[v]);
          if (result.evaluations >= opts.max_evaluations) break;
        }
      }
    }
  }

  const std::size_t best =
      static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  result.x = xs[best];
  result.fx = fs[best];
  return result;
}

// ---------------------------------------------------------------------------
// Simulation-backed calibration.
// ---------------------------------------------------------------------------

PortfolioSpec single_firm_portfolio(double sigma, double lambda, double jump_mean,
                                    double jump_sd, double interjump_mean, double horizon) {
  PortfolioSpec p;
  FirmSpec firm;
  firm.x0 = 2.0;
  firm.kappa_log = 0.0;
  firm.mu = -0.001;
  firm.gamma = -0.001;
  firm.jump_mean = jump_mean;
  firm.jump_sd = jump_sd;
  p.firms = {firm};
  p.diffusion = DiffusionMatrix::from_rows({{sigma}});
  p.lambda = lambda;
  p.interjump_mean = interjump_mean;
  p.horizon = horizon;
  return p;
}

PortfolioSpec pair_portfolio(const std::array<double, 4>& loadings, const JumpParams& jumps,
                             double interjump_mean, double horizon) {
  PortfolioSpec p;
  FirmSpec firm;
  firm.x0 = 2.0;
  firm.kappa_log = 0.0;
  firm.mu = -0.001;
  firm.gamma = -0.001;
  firm.jump_mean = jumps.jump_mean;
  firm.jump_sd = jumps.jump_sd;
  p.firms = {firm, firm};
  p.diffusion = DiffusionMatrix::from_rows(
      {{loadings[0], loadings[1]}, {loadings[2], loadings[3]}});
  p.lambda = jumps.lambda;
  p.interjump_mean = interjump_mean;
  p.horizon = horizon;
  return p;
}

double objective(const PortfolioSpec& portfolio, std::span<const HistoricalCurve> historical,
                 std::size_t sim_runs, std::uint64_t seed, unsigned workers) {
  if (historical.size() != portfolio.size())
    throw std::invalid_argument("objective: one historical curve per firm required");
  const SampleSet set = simulate(portfolio, sim_runs, seed, workers);
  const auto grid = uniform_grid(portfolio.horizon);
  std::vector<RateCurve> model;
  model.reserve(portfolio.size());
  for (std::size_t i = 0; i < portfolio.size(); ++i)
    model.push_back(estimate_firm(set, i, grid).rates);
  return curve_loss(model, historical);
}

namespace {

double curve_horizon(const HistoricalCurve& c) { return c.times.back(); }

std::vector<RateCurve> confirmed_curves(const PortfolioSpec& p, std::size_t runs,
                                        std::uint64_t seed, unsigned workers) {
  const SampleSet set = simulate(p, runs, seed, workers);
  const auto grid = uniform_grid(p.horizon);
  std::vector<RateCurve> out;
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back(estimate_firm(set, i, grid).rates);
  return out;
}

}  // namespace

CalibrationResult calibrate_single_firm(const HistoricalCurve& historical,
                                        std::array<double, 4> init,
                                        const CalibrationSettings& settings) {
  historical.validate();
  const double horizon = curve_horizon(historical);
  const std::vector<HistoricalCurve> hist = {historical};

  std::vector<double> lo = settings.lower.value_or(std::vector<double>{1e-4, 0.0, -2.0, 1e-3});
  std::vector<double> hi = settings.upper.value_or(std::vector<double>{1.0, 2.0, 2.0, 2.0});

  auto loss = [&](std::span<const double> x) {
    const PortfolioSpec p = single_firm_portfolio(x[0], x[1], x[2], x[3],
                                                  settings.interjump_mean, horizon);
    return objective(p, hist, settings.sim_runs, settings.seed, settings.workers);
  };

  NelderMeadOptions opts;
  opts.max_evaluations = settings.max_evaluations;
  opts.diameter_tol = settings.diameter_tol;
  const MinimizeResult mr =
      minimize(loss, std::span<const double>(init.data(), 4), lo, hi, opts);

  CalibrationResult result;
  result.param_names = {"sigma", "lambda", "jump_mean", "jump_sd"};
  result.params = mr.x;
  result.objective_value = mr.fx;
  result.evaluations = mr.evaluations;
  result.seed = settings.seed;
  result.trace = mr.trace;

  const PortfolioSpec best = single_firm_portfolio(mr.x[0], mr.x[1], mr.x[2], mr.x[3],
                                                   settings.interjump_mean, horizon);
  result.confirmed_rates =
      confirmed_curves(best, settings.confirm_runs, settings.seed, settings.workers);
  result.confirmed_objective =
      curve_loss(result.confirmed_rates, std::span<const HistoricalCurve>(hist));
  return result;
}

CalibrationResult calibrate_pair(const HistoricalCurve& hist_a, const HistoricalCurve& hist_b,
                                 const JumpParams& jumps, std::array<double, 4> init,
                                 const CalibrationSettings& settings) {
  hist_a.validate();
  hist_b.validate();
  const double horizon = std::max(curve_horizon(hist_a), curve_horizon(hist_b));
  const std::vector<HistoricalCurve> hist = {hist_a, hist_b};

  std::vector<double> lo = settings.lower.value_or(std::vector<double>(4, 1e-4));
  std::vector<double> hi = settings.upper.value_or(std::vector<double>(4, 1.0));

  auto loss = [&](std::span<const double> x) {
    const PortfolioSpec p = pair_portfolio({x[0], x[1], x[2], x[3]}, jumps,
                                           settings.interjump_mean, horizon);
    return objective(p, hist, settings.sim_runs, settings.seed, settings.workers);
  };

  NelderMeadOptions opts;
  opts.max_evaluations = settings.max_evaluations;
  opts.diameter_tol = settings.diameter_tol;
  const MinimizeResult mr =
      minimize(loss, std::span<const double>(init.data(), 4), lo, hi, opts);

  CalibrationResult result;
  result.param_names = {"sigma11", "sigma12", "sigma21", "sigma22"};
  result.params = mr.x;
  result.objective_value = mr.fx;
  result.evaluations = mr.evaluations;
  result.seed = settings.seed;
  result.trace = mr.trace;

  const PortfolioSpec best = pair_portfolio({mr.x[0], mr.x[1], mr.x[2], mr.x[3]}, jumps,
                                            settings.interjump_mean, horizon);
  result.sigma1 = effective_vol(best.diffusion, 0);
  result.sigma2 = effective_vol(best.diffusion, 1);
  result.rho12 = diffusion_correlation(best.diffusion, 0, 1);
  result.confirmed_rates =
      confirmed_curves(best, settings.confirm_runs, settings.seed, settings.workers);
  result.confirmed_objective =
      curve_loss(result.confirmed_rates, std::span<const HistoricalCurve>(hist));
  return result;
}

}  // namespace fptmc
