#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace fptmc {

// One interjump interval of a single firm, in boundary-shifted coordinates:
// the process starts the interval at x_prev (just after the previous jump),
// ends at x_next (just before the next jump), and defaults on first contact
// with the constant level `boundary` (0 after the shift).
struct IntervalEndpoints {
  double t_prev = 0.0;
  double t_next = 1.0;
  double x_prev = 1.0;   // X(T_{j-1}^+)
  double x_next = 1.0;   // X(T_j^-)
  double mu = 0.0;       // boundary-shifted drift
  double sigma = 1.0;    // effective volatility, > 0
  double boundary = 0.0;

  double tau() const { return t_next - t_prev; }
};

// Probability that the Brownian bridge pinned at (x_prev, x_next) stays
// above the boundary throughout the interval:
//   1 - exp(-2 (x_prev - D)(x_next - D) / (tau sigma^2))  when x_next > D,
//   0 otherwise.
// Requires x_prev > boundary.
double survival_probability(const IntervalEndpoints& e);

// 1 - survival_probability, computed without cancellation (the quantity the
// sampler's acceptance window is built from).
double crossing_probability(const IntervalEndpoints& e);

// Conditional density of the first boundary crossing at time t inside the
// open interval, given both endpoints. Zero when x_prev sits exactly on the
// boundary. Throws for t outside (t_prev, t_next).
double crossing_density(const IntervalEndpoints& e, double t);

// Index of the first jump that lands the process at or below its boundary
// while every earlier pre/post-jump value was above. Indices are 1-based to
// match the jump-instant numbering (entry k-1 of each span belongs to the
// k-th jump). Returns nullopt when no jump-driven default exists.
std::optional<std::size_t> first_jump_default_index(std::span<const double> prejump,
                                                    std::span<const double> postjump,
                                                    std::span<const double> boundaries);

}  // namespace fptmc
