#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fptmc/model.hpp"
#include "fptmc/stochastic.hpp"

namespace fptmc {

enum class CaseTag { interior, jump_boundary };

// One weighted first-passage draw. Interior crossings carry the stretched
// uniform-window weight b_ij * g_ij(s); crossings forced by a jump landing
// below the boundary carry weight 1.
struct FptSample {
  std::size_t firm = 0;
  double time = 0.0;
  double weight = 0.0;
  CaseTag tag = CaseTag::interior;
};

// Result of one Monte Carlo run: at most one sample per firm, plus the
// shared jump timeline. A firm defaulted in the run iff it has a sample.
struct RunOutcome {
  std::vector<std::optional<FptSample>> samples;
  JumpTimeline timeline;

  bool defaulted(std::size_t firm) const { return samples[firm].has_value(); }
  std::optional<double> default_time(std::size_t firm) const {
    if (!samples[firm]) return std::nullopt;
    return samples[firm]->time;
  }
};

struct SampleSet {
  PortfolioSpec portfolio;
  std::uint64_t seed = 0;
  std::vector<RunOutcome> outcomes;

  std::size_t n_runs() const { return outcomes.size(); }
};

// Simulates a single run on the given stream: one shared jump timeline,
// jump-to-jump endpoint sampling, and the three-case first-passage logic
// per firm per interval.
RunOutcome simulate_run(const PortfolioSpec& portfolio, RngStream& stream);

// Executes n_runs independent runs on streams derived from (seed, run index)
// and aggregates them in run-index order, so the result is bit-identical for
// any worker count. workers = 0 selects the hardware concurrency.
SampleSet simulate(const PortfolioSpec& portfolio, std::size_t n_runs, std::uint64_t seed,
                   unsigned workers = 1);

}  // namespace fptmc
