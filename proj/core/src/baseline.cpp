#include "fptmc/baseline.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fptmc/errors.hpp"
#include "fptmc/stochastic.hpp"

namespace fptmc {

namespace {

struct EulerContext {
  std::vector<double> y0;
  std::vector<double> drift;
  std::size_t n_steps;
  double dt_last;

  EulerContext(const PortfolioSpec& p, double dt) {
    p.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("euler_simulate: dt must be > 0");
    if (dt > p.horizon) throw std::invalid_argument("euler_simulate: dt must not exceed the horizon");
    const std::size_t n = p.size();
    y0.resize(n);
    drift.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y0[i] = p.firms[i].shifted_start();
      drift[i] = p.firms[i].shifted_drift();
      if (!(y0[i] > 0.0))
        throw std::invalid_argument("euler_simulate: firm starts at or below its boundary");
    }
    n_steps = static_cast<std::size_t>(std::ceil(p.horizon / dt - 1e-12));
    dt_last = p.horizon - static_cast<double>(n_steps - 1) * dt;
  }
};

RunOutcome euler_run(const PortfolioSpec& p, const EulerContext& ctx, double dt,
                     RngStream& stream, std::vector<double>& y, std::vector<double>& y_next,
                     std::vector<double>& jumps) {
  const std::size_t n = p.size();
  RunOutcome outcome;
  outcome.samples.assign(n, std::nullopt);

  if (p.lambda == 0.0) {
    outcome.timeline.instants = {0.0, p.horizon};
  } else {
    outcome.timeline = sample_jump_timeline(p.interjump_mean, p.horizon, stream);
  }
  const std::size_t jump_count = outcome.timeline.jump_count();

  y = ctx.y0;
  std::size_t n_alive = n;
  std::size_t next_jump = 1;  // index into timeline.instants

  double t = 0.0;
  for (std::size_t step = 1; step <= ctx.n_steps && n_alive > 0; ++step) {
    const double h = (step == ctx.n_steps) ? ctx.dt_last : dt;
    t += h;

    sample_interjump_endpoint(y, ctx.drift, p.diffusion, h, stream,
                              std::span<double>(y_next));
    y.swap(y_next);

    // Apply every pending jump whose instant falls at or before this grid time.
    while (next_jump <= jump_count && outcome.timeline.instants[next_jump] <= t) {
      sample_jump_sizes(p.firms, stream, std::span<double>(jumps));
      for (std::size_t i = 0; i < n; ++i)
        if (!outcome.samples[i]) y[i] += jumps[i];
      ++next_jump;
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (!outcome.samples[i] && y[i] <= 0.0) {
        outcome.samples[i] = FptSample{i, t, 1.0, CaseTag::interior};
        --n_alive;
      }
    }
  }
  return outcome;
}

}  // namespace

SampleSet euler_simulate(const PortfolioSpec& portfolio, const EulerConfig& cfg) {
  if (cfg.n_runs < 1) throw std::invalid_argument("euler_simulate: n_runs must be >= 1");
  EulerContext ctx(portfolio, cfg.dt);

  SampleSet set;
  set.portfolio = portfolio;
  set.seed = cfg.seed;
  set.outcomes.resize(cfg.n_runs);

  unsigned n_workers = cfg.workers;
  if (n_workers == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_workers = hw == 0 ? 1 : hw;
  }

  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> y, y_next(portfolio.size()), jumps(portfolio.size());
    for (std::size_t r = begin; r < end; ++r) {
      RngStream stream(cfg.seed, r);
      set.outcomes[r] = euler_run(portfolio, ctx, cfg.dt, stream, y, y_next, jumps);
    }
  };

  if (n_workers <= 1) {
    run_range(0, cfg.n_runs);
    return set;
  }
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kBatch = 64;
  auto worker = [&]() {
    for (;;) {
      const std::size_t begin = next.fetch_add(kBatch);
      if (begin >= cfg.n_runs) return;
      run_range(begin, std::min(begin + kBatch, cfg.n_runs));
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return set;
}

double nojump_default_probability(double z, double t) {
  if (!(z > 0.0)) throw std::invalid_argument("nojump_default_probability: z must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("nojump_default_probability: t must be > 0");
  // Phi(x) = erfc(-x / sqrt(2)) / 2, accurate in the far tail.
  return std::erfc(z / (std::sqrt(t) * std::sqrt(2.0)));
}

DistanceFit fit_distance_to_default(const RateCurve& historical) {
  if (historical.grid.empty() || historical.grid.size() != historical.rates.size())
    throw std::invalid_argument("fit_distance_to_default: empty or inconsistent curve");
  for (std::size_t i = 0; i < historical.grid.size(); ++i) {
    if (!(historical.grid[i] > 0.0))
      throw std::invalid_argument("fit_distance_to_default: times must be > 0");
    if (historical.rates[i] < 0.0 || historical.rates[i] > 1.0)
      throw std::invalid_argument("fit_distance_to_default: rates must lie in [0,1]");
  }

  auto loss = [&](double z) {
    double acc = 0.0;
    for (std::size_t i = 0; i < historical.grid.size(); ++i) {
      const double t = historical.grid[i];
      const double d = (nojump_default_probability(z, t) - historical.rates[i]) / t;
      acc += d * d;
    }
    return acc;
  };

  constexpr double kLo = 1e-3, kHi = 60.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kLo, b = kHi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = loss(c), fd = loss(d);
  while (b - a > 1e-5) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = loss(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = loss(d);
    }
  }
  DistanceFit fit;
  fit.z = 0.5 * (a + b);
  fit.saturated = fit.z > kHi - 0.01 || fit.z < kLo + 1e-4;
  if (fit.saturated) fit.z = fit.z > kHi - 0.01 ? kHi : kLo;
  return fit;
}

}  // namespace fptmc
