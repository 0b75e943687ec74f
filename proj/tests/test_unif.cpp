#include <doctest.h>

#include <cmath>
#include <vector>

#include "fptmc/bridge.hpp"
#include "fptmc/estimate.hpp"
#include "fptmc/stochastic.hpp"
#include "fptmc/unif.hpp"
#include "support/quadrature.hpp"
#include "support/stats.hpp"

using namespace fptmc;
namespace ts = testsupport;

namespace {

PortfolioSpec single_firm(double sigma, double lambda, double interjump_mean,
                          double jump_mean = 0.0, double jump_sd = 0.5, double mu = -0.001,
                          double gamma = -0.001, double x0 = 2.0) {
  PortfolioSpec p;
  FirmSpec f;
  f.x0 = x0;
  f.mu = mu;
  f.gamma = gamma;
  f.kappa_log = 0.0;
  f.jump_mean = jump_mean;
  f.jump_sd = jump_sd;
  p.firms = {f};
  p.diffusion = DiffusionMatrix::from_rows({{sigma}});
  p.lambda = lambda;
  p.interjump_mean = interjump_mean;
  p.horizon = 10.0;
  return p;
}

PortfolioSpec a_rated_pair() {
  PortfolioSpec p;
  FirmSpec f;
  f.x0 = 2.0;
  f.mu = -0.001;
  f.gamma = -0.001;
  f.kappa_log = 0.0;
  f.jump_mean = -0.20003641;
  f.jump_sd = 0.50000485;
  p.firms = {f, f};
  p.diffusion = DiffusionMatrix::from_rows({{0.06963755, 0.02993134},
                                            {0.03387809, 0.06691001}});
  p.lambda = 0.10001559;
  p.interjump_mean = 1.0 / 0.10001559;
  p.horizon = 10.0;
  return p;
}

double default_fraction(const SampleSet& set, std::size_t firm, double t) {
  std::size_t count = 0;
  for (const auto& run : set.outcomes) {
    const auto dt = run.default_time(firm);
    count += dt && *dt <= t;
  }
  return static_cast<double>(count) / static_cast<double>(set.n_runs());
}

// First-passage probability of drifted Brownian motion from y0 > 0 to 0 by
// time T (reflection formula; the no-jump oracle for the engine).
double drifted_crossing_probability(double y0, double mu, double sigma, double T) {
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double sd = sigma * std::sqrt(T);
  return phi((-y0 - mu * T) / sd) +
         std::exp(-2.0 * mu * y0 / (sigma * sigma)) * phi((-y0 + mu * T) / sd);
}

}  // namespace

TEST_SUITE("unif") {

TEST_CASE("no-jump run reduces to one bridge over the horizon") {
  auto p = single_firm(2.0 / 8.06, 0.0, 1e9);
  RngStream stream(77, 0);
  const auto outcome = simulate_run(p, stream);
  CHECK(outcome.timeline.instants == std::vector<double>{0.0, 10.0});
  CHECK(outcome.samples.size() == 1);
}

TEST_CASE("no-jump default frequency matches the closed form" * doctest::timeout(300)) {
  SUBCASE("driftless case (gamma = mu)") {
    auto p = single_firm(2.0 / 8.06, 0.0, 1e9);
    const auto set = simulate(p, 50000, 4242, 2);
    const double expected = drifted_crossing_probability(2.0, 0.0, 2.0 / 8.06, 10.0);
    const double observed = default_fraction(set, 0, 10.0);
    const double se = std::sqrt(expected * (1.0 - expected) / 50000.0);
    CHECK(std::abs(observed - expected) <= 3.0 * se);
  }
  SUBCASE("drifted case") {
    // shifted drift mu' = -0.05, shifted start 0.5
    auto p = single_firm(0.25, 0.0, 1e9, 0.0, 0.5, -0.051, -0.001, 0.5);
    const auto set = simulate(p, 50000, 4243, 2);
    const double expected = drifted_crossing_probability(0.5, -0.05, 0.25, 10.0);
    const double observed = default_fraction(set, 0, 10.0);
    const double se = std::sqrt(expected * (1.0 - expected) / 50000.0);
    CHECK(std::abs(observed - expected) <= 3.0 * se);
  }
}

TEST_CASE("near-zero diffusion with gentle drift never defaults") {
  auto p = single_firm(1e-8, 0.0, 1e9);  // mu' = 0, start 2
  const auto set = simulate(p, 2000, 9, 1);
  for (const auto& run : set.outcomes) CHECK(!run.defaulted(0));
}

TEST_CASE("interior acceptance is unbiased for the crossing integral") {
  // Fixed interval endpoints; acceptance frequency must equal 1 - P and the
  // mean accepted weight must estimate the quadrature of g.
  IntervalEndpoints e;
  e.t_prev = 0.0;
  e.t_next = 1.0;
  e.x_prev = 0.8;
  e.x_next = 0.6;
  e.mu = -0.1;
  e.sigma = 1.0;

  const double q = crossing_probability(e);
  const double window = e.tau() / q;
  RngStream stream(303, 0);
  const std::size_t n = 100000;
  std::size_t accepted = 0;
  std::vector<double> contribution(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = e.t_prev + window * stream.uniform();
    if (s > e.t_prev && s < e.t_next) {
      ++accepted;
      contribution[i] = window * crossing_density(e, s);
    }
  }
  const double acc_rate = static_cast<double>(accepted) / static_cast<double>(n);
  CHECK(std::abs(acc_rate - q) <= 3.0 * std::sqrt(q * (1.0 - q) / n));

  const double eps = 1e-9;
  const double integral = ts::integrate(
      [&](double t) { return crossing_density(e, t); }, e.t_prev + eps, e.t_next - eps, 1e-10);
  const double mean_contribution = ts::mean(contribution);
  const double se = std::sqrt(ts::variance(contribution) / static_cast<double>(n));
  CHECK(std::abs(mean_contribution - integral) <= 3.0 * se);
}

TEST_CASE("same seed is bit-identical across worker counts") {
  auto p = a_rated_pair();
  const auto s1 = simulate(p, 4000, 555, 1);
  const auto s8 = simulate(p, 4000, 555, 8);
  REQUIRE(s1.n_runs() == s8.n_runs());
  for (std::size_t r = 0; r < s1.n_runs(); ++r) {
    const auto& a = s1.outcomes[r];
    const auto& b = s8.outcomes[r];
    REQUIRE(a.timeline.instants == b.timeline.instants);
    for (std::size_t i = 0; i < 2; ++i) {
      REQUIRE(a.samples[i].has_value() == b.samples[i].has_value());
      if (a.samples[i]) {
        CHECK(a.samples[i]->time == b.samples[i]->time);
        CHECK(a.samples[i]->weight == b.samples[i]->weight);
        CHECK(a.samples[i]->tag == b.samples[i]->tag);
      }
    }
  }
}

TEST_CASE("single run works and respects the one-sample invariant") {
  auto p = a_rated_pair();
  const auto set = simulate(p, 1, 1, 1);
  CHECK(set.n_runs() == 1);
}

TEST_CASE("defaulted firms stay defaulted and sample times stay in range") {
  auto p = a_rated_pair();
  const auto set = simulate(p, 20000, 808, 2);
  std::size_t interior = 0, at_jump = 0;
  for (const auto& run : set.outcomes) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (!run.samples[i]) continue;
      const auto& s = *run.samples[i];
      CHECK(s.time > 0.0);
      CHECK(s.time <= 10.0);
      CHECK(s.weight >= 0.0);
      if (s.tag == CaseTag::interior) ++interior;
      if (s.tag == CaseTag::jump_boundary) {
        ++at_jump;
        // jump-boundary defaults happen exactly at a timeline instant
        bool on_instant = false;
        for (double tj : run.timeline.instants) on_instant = on_instant || tj == s.time;
        CHECK(on_instant);
      }
    }
  }
  CHECK(interior > 0);
  CHECK(at_jump > 0);
}

TEST_CASE("independent firms behave like isolated single firms" * doctest::timeout(600)) {
  // Diagonal diffusion and zero uniform-correlation target: firm 0's
  // default-time distribution must match a standalone single-firm run.
  PortfolioSpec pair = a_rated_pair();
  pair.diffusion = DiffusionMatrix::from_rows({{0.09000984, 0.0}, {0.0, 0.09000984}});
  pair.corr_target = 0.0;
  auto solo = single_firm(0.09000984, 0.10001559, 1.0 / 0.10001559, -0.20003641, 0.50000485);

  const std::size_t runs = 60000;
  const auto set_pair = simulate(pair, runs, 2025, 2);
  const auto set_solo = simulate(solo, runs, 4051, 2);

  std::vector<double> times_pair, times_solo;
  for (const auto& run : set_pair.outcomes)
    if (run.samples[0]) times_pair.push_back(run.samples[0]->time);
  for (const auto& run : set_solo.outcomes)
    if (run.samples[0]) times_solo.push_back(run.samples[0]->time);

  REQUIRE(times_pair.size() > 100);
  REQUIRE(times_solo.size() > 100);
  const double d = ts::ks_two_sample(times_pair, times_solo);
  CHECK(d < ts::ks_two_sample_critical(0.01, times_pair.size(), times_solo.size()));

  const double pa = default_fraction(set_pair, 0, 10.0);
  const double ps = default_fraction(set_solo, 0, 10.0);
  const double se = std::sqrt(2.0 * ps * (1.0 - ps) / static_cast<double>(runs));
  CHECK(std::abs(pa - ps) <= 4.0 * se);
}

TEST_CASE("weighted density mass agrees with the indicator frequency" *
          doctest::timeout(300)) {
  auto p = single_firm(0.09000984, 0.10001559, 1.0 / 0.10001559, -0.20003641, 0.50000485);
  const std::size_t runs = 50000;
  const auto set = simulate(p, runs, 31337, 2);
  const auto grid = uniform_grid(10.0, 2001);
  const auto est = estimate_firm(set, 0, grid);
  const double kde_mass = est.rates.rates.back();
  const double indicator = default_fraction(set, 0, 10.0);

  // Both estimate P(T) as a mean of per-run contributions; bound the gap by
  // the spread of the per-run difference plus a small kernel-truncation
  // allowance for mass smoothed past the horizon.
  std::vector<double> diff(runs, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    const auto& run = set.outcomes[r];
    const double mass = run.samples[0] ? run.samples[0]->weight : 0.0;
    diff[r] = mass - (run.defaulted(0) ? 1.0 : 0.0);
  }
  const double se = std::sqrt(ts::variance(diff) / static_cast<double>(runs));
  CHECK(std::abs(kde_mass - indicator) <= 3.0 * se + 0.002);
}

}  // TEST_SUITE
