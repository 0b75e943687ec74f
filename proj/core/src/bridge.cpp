#include "fptmc/bridge.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fptmc/errors.hpp"

namespace fptmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogUnderflow = -745.0;  // exp() underflows to 0 below this

void check_interval(const IntervalEndpoints& e) {
  if (!(e.t_next > e.t_prev))
    throw std::invalid_argument("bridge: t_next must exceed t_prev");
  if (!(e.sigma > 0.0)) throw std::invalid_argument("bridge: sigma must be > 0");
}

}  // namespace

double survival_probability(const IntervalEndpoints& e) {
  return 1.0 - crossing_probability(e);
}

double crossing_probability(const IntervalEndpoints& e) {
  check_interval(e);
  const double a = e.x_prev - e.boundary;
  const double b = e.x_next - e.boundary;
  if (!(a > 0.0))
    throw std::invalid_argument(
        "crossing_probability: x_prev must be above the boundary (prior default "
        "must be handled by the caller)");
  if (b <= 0.0) return 1.0;
  const double expo = -2.0 * a * b / (e.tau() * e.sigma * e.sigma);
  return expo < kLogUnderflow ? 0.0 : std::exp(expo);
}

double crossing_density(const IntervalEndpoints& e, double t) {
  check_interval(e);
  if (!(t > e.t_prev && t < e.t_next))
    throw std::invalid_argument("crossing_density: t must lie strictly inside the interval");
  const double a = e.x_prev - e.boundary;
  const double b = e.x_next - e.boundary;
  if (a < 0.0)
    throw std::invalid_argument("crossing_density: x_prev must not be below the boundary");
  if (a == 0.0) return 0.0;  // leading factor X(T_{j-1}^+) - D vanishes

  const double tau = e.tau();
  const double s2 = e.sigma * e.sigma;
  const double dl = t - e.t_prev;   // time since interval start
  const double dr = e.t_next - t;   // time to interval end

  // First-passage factor from the left endpoint and transition factor to the
  // right endpoint, assembled in log space; the normalizer y is the free
  // transition density between the two endpoints over the whole interval.
  const double log_y = -std::log(e.sigma * std::sqrt(2.0 * kPi * tau)) -
                       (a - b + e.mu * tau) * (a - b + e.mu * tau) / (2.0 * tau * s2);
  if (log_y < kLogUnderflow)
    throw numeric_error("crossing_density: endpoints describe an impossible transition");

  const double er = b - e.mu * dr;  // right residual
  const double el = a + e.mu * dl;  // left residual
  const double log_g = std::log(a) - std::log(2.0 * kPi * s2) - 1.5 * std::log(dl) -
                       0.5 * std::log(dr) - er * er / (2.0 * dr * s2) -
                       el * el / (2.0 * dl * s2) - log_y;
  return log_g < kLogUnderflow ? 0.0 : std::exp(log_g);
}

std::optional<std::size_t> first_jump_default_index(std::span<const double> prejump,
                                                    std::span<const double> postjump,
                                                    std::span<const double> boundaries) {
  const std::size_t m = prejump.size();
  if (postjump.size() != m || boundaries.size() != m)
    throw std::invalid_argument("first_jump_default_index: span size mismatch");
  for (std::size_t k = 0; k < m; ++k) {
    if (prejump[k] <= boundaries[k]) return std::nullopt;  // diffusion crossing, not a jump
    if (postjump[k] <= boundaries[k]) return k + 1;
  }
  return std::nullopt;
}

}  // namespace fptmc
