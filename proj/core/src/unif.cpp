#include "fptmc/unif.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fptmc/bridge.hpp"
#include "fptmc/errors.hpp"

namespace fptmc {

namespace {

// Per-portfolio quantities shared by all runs: boundary-shifted starts and
// drifts, effective volatilities, and the calibrated uniform generator.
struct EngineContext {
  std::vector<double> y0;
  std::vector<double> drift;
  std::vector<double> sigma;
  SumOfUniforms uniforms;

  explicit EngineContext(const PortfolioSpec& p) {
    p.validate();
    const std::size_t n = p.size();
    y0.resize(n);
    drift.resize(n);
    sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y0[i] = p.firms[i].shifted_start();
      drift[i] = p.firms[i].shifted_drift();
      sigma[i] = effective_vol(p.diffusion, i);
      if (!(y0[i] > 0.0))
        throw std::invalid_argument("simulate: firm starts at or below its boundary");
    }
    uniforms = SumOfUniforms::calibrate(p.uniform_corr_target());
  }
};

// Scratch buffers reused across the runs handled by one worker.
struct RunWorkspace {
  std::vector<double> y;       // value entering the current interval
  std::vector<double> y_pre;   // value just before the interval's right end
  std::vector<double> jumps;
  std::vector<double> uniforms;
  std::vector<char> alive;
  std::vector<std::size_t> active;  // alive firm indices, ascending
};

RunOutcome run_once(const PortfolioSpec& p, const EngineContext& ctx, RngStream& stream,
                    RunWorkspace& ws) {
  const std::size_t n = p.size();
  RunOutcome outcome;
  outcome.samples.assign(n, std::nullopt);

  // lambda == 0 means no jump component: the whole horizon is one bridge.
  if (p.lambda == 0.0) {
    outcome.timeline.instants = {0.0, p.horizon};
  } else {
    outcome.timeline = sample_jump_timeline(p.interjump_mean, p.horizon, stream);
  }
  const auto& t = outcome.timeline.instants;
  const std::size_t jump_count = outcome.timeline.jump_count();

  ws.y = ctx.y0;
  ws.y_pre.resize(n);
  ws.jumps.resize(n);
  ws.alive.assign(n, 1);
  std::size_t n_alive = n;

  for (std::size_t j = 1; j < t.size() && n_alive > 0; ++j) {
    const double t_prev = t[j - 1];
    const double t_next = t[j];
    const double tau = t_next - t_prev;
    const bool has_jump = j <= jump_count;  // the final instant is the horizon, not a jump

    sample_interjump_endpoint(ws.y, ctx.drift, p.diffusion, tau, stream,
                              std::span<double>(ws.y_pre));
    if (has_jump) sample_jump_sizes(p.firms, stream, std::span<double>(ws.jumps));

    // One correlated uniform vector per interval for the non-defaulted
    // firms; every active firm consumes its coordinate even when its
    // interval cannot produce an interior crossing.
    ws.active.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (ws.alive[i]) ws.active.push_back(i);
    ws.uniforms.resize(ws.active.size());
    ctx.uniforms.sample(stream, std::span<double>(ws.uniforms));

    for (std::size_t slot = 0; slot < ws.active.size(); ++slot) {
      const std::size_t i = ws.active[slot];
      IntervalEndpoints e;
      e.t_prev = t_prev;
      e.t_next = t_next;
      e.x_prev = ws.y[i];
      e.x_next = ws.y_pre[i];
      e.mu = ctx.drift[i];
      e.sigma = ctx.sigma[i];

      const double q = crossing_probability(e);  // 1 - P_ij
      if (q > 0.0) {
        // Stretch the interval by 1/q; a uniform on the stretched window
        // lands inside the interval with probability exactly q.
        const double window = tau / q;
        const double s = t_prev + window * ws.uniforms[slot];
        if (s < t_next) {
          const double g = crossing_density(e, s);
          outcome.samples[i] = FptSample{i, s, window * g, CaseTag::interior};
          ws.alive[i] = 0;
          --n_alive;
          continue;
        }
      }
      if (has_jump) {
        const double y_post = ws.y_pre[i] + ws.jumps[i];
        if (y_post <= 0.0) {
          // Jump lands at or below the boundary: default at the jump instant.
          outcome.samples[i] = FptSample{i, t_next, 1.0, CaseTag::jump_boundary};
          ws.alive[i] = 0;
          --n_alive;
          continue;
        }
        ws.y[i] = y_post;
      } else {
        ws.y[i] = ws.y_pre[i];
      }
    }
  }
  return outcome;
}

unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

RunOutcome simulate_run(const PortfolioSpec& portfolio, RngStream& stream) {
  EngineContext ctx(portfolio);
  RunWorkspace ws;
  return run_once(portfolio, ctx, stream, ws);
}

SampleSet simulate(const PortfolioSpec& portfolio, std::size_t n_runs, std::uint64_t seed,
                   unsigned workers) {
  if (n_runs < 1) throw std::invalid_argument("simulate: n_runs must be >= 1");
  EngineContext ctx(portfolio);

  SampleSet set;
  set.portfolio = portfolio;
  set.seed = seed;
  set.outcomes.resize(n_runs);

  const unsigned n_workers = resolve_workers(workers);
  if (n_workers <= 1) {
    RunWorkspace ws;
    for (std::size_t r = 0; r < n_runs; ++r) {
      RngStream stream(seed, r);
      set.outcomes[r] = run_once(portfolio, ctx, stream, ws);
    }
    return set;
  }

  // Each run owns a stream derived from its index and writes only its own
  // slot, so any scheduling yields identical results.
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kBatch = 256;
  auto worker = [&]() {
    RunWorkspace ws;
    for (;;) {
      const std::size_t begin = next.fetch_add(kBatch);
      if (begin >= n_runs) return;
      const std::size_t end = std::min(begin + kBatch, n_runs);
      for (std::size_t r = begin; r < end; ++r) {
        RngStream stream(seed, r);
        set.outcomes[r] = run_once(portfolio, ctx, stream, ws);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return set;
}

}  // namespace fptmc
