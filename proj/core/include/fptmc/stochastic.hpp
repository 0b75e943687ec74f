#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fptmc/model.hpp"

namespace fptmc {

// Reproducible random stream. Two streams built from the same
// (master_seed, run_index, substream) produce identical variate
// sequences; distinct run indices give statistically independent
// substreams via a counter-based seed derivation, so results never
// depend on worker scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t run_index = 0,
                     std::uint64_t substream = 0);

  double uniform();                      // U(0,1)
  double normal();                       // N(0,1)
  double exponential(double mean);       // Exp with the given mean

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t run_index() const { return run_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t run_index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Ordered jump instants T_0 = 0 < T_1 < ... < T_M < T_{M+1} = T.
struct JumpTimeline {
  std::vector<double> instants;

  std::size_t jump_count() const { return instants.size() - 2; }
  double horizon() const { return instants.back(); }
};

// Draws exponential interjump times (given mean) until the horizon is
// exceeded. The returned timeline is shared by every firm in a run.
JumpTimeline sample_jump_timeline(double interjump_mean, double horizon, RngStream& stream);

// Advances all firms across one interjump interval of length tau:
// out_i = x_prev_i + drift_i * tau + sqrt(tau) * sum_k sigma_ik z_k with one
// shared standard normal vector z, so the increment covariance is tau * sigma sigma^T.
void sample_interjump_endpoint(std::span<const double> x_prev, std::span<const double> drift,
                               const DiffusionMatrix& diffusion, double tau, RngStream& stream,
                               std::span<double> out);

// Independent per-firm jump sizes Z_i ~ N(jump_mean_i, jump_sd_i).
void sample_jump_sizes(std::span<const FirmSpec> firms, RngStream& stream,
                       std::span<double> out);

// Correlated uniform variates built from a shared uniform: each output is
// cdf(U_i + a * U_0) where the cdf is the exact (trapezoidal) distribution
// function of the sum, so marginals stay uniform on [0,1] while the shared
// component induces nonnegative equicorrelation controlled by a.
class SumOfUniforms {
 public:
  SumOfUniforms() = default;  // a = 0: independent outputs

  // Exact Pearson correlation of an output pair for mixing coefficient a.
  static double pair_correlation(double a);

  // Finds a >= 0 whose pair correlation matches target within 1e-4 by
  // bisection on the exact correlation. Throws std::invalid_argument for
  // targets outside [0,1) and numeric_error past the saturation bound.
  static SumOfUniforms calibrate(double target_corr);

  double mixing() const { return a_; }
  double achieved_correlation() const { return pair_correlation(a_); }

  // Fills out with out.size() correlated uniforms. Always consumes
  // 1 + out.size() raw uniforms (the shared draw plus one per slot) so
  // stream alignment does not depend on the requested count.
  void sample(RngStream& stream, std::span<double> out) const;

  // The trapezoidal CDF of U[0,1] + U[0,a], exposed for testing.
  double transform(double s) const;

 private:
  explicit SumOfUniforms(double a) : a_(a) {}
  double a_ = 0.0;
};

// One-shot helper: calibrates the mixing coefficient for target_corr and
// samples n correlated uniforms.
void sample_correlated_uniforms(std::size_t n, double target_corr, RngStream& stream,
                                std::span<double> out);

// Equicorrelation target for a set of pairwise targets: their average.
// Emits a warning through warn (if non-null) when the targets disagree by
// more than 1e-6, since only the equicorrelated case is supported.
double equicorrelated_target(std::span<const double> pairwise_targets,
                             std::vector<std::string>* warn = nullptr);

}  // namespace fptmc
