#include "fptmc/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fptmc/errors.hpp"

namespace fptmc {

namespace {

// splitmix64 finalizer; used to derive well-mixed engine seeds from the
// (master_seed, run_index, substream) triple.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t run_index,
                     std::uint64_t substream)
    : master_seed_(master_seed), run_index_(run_index) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ mix64(run_index));
  h = mix64(h ^ mix64(substream));
  engine_.seed(h);
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential(double mean) {
  std::exponential_distribution<double> dist(1.0 / mean);
  return dist(engine_);
}

JumpTimeline sample_jump_timeline(double interjump_mean, double horizon, RngStream& stream) {
  if (!(interjump_mean > 0.0))
    throw std::invalid_argument("sample_jump_timeline: interjump_mean must be > 0");
  if (!(horizon > 0.0))
    throw std::invalid_argument("sample_jump_timeline: horizon must be > 0");

  JumpTimeline timeline;
  timeline.instants.push_back(0.0);
  double t = stream.exponential(interjump_mean);
  while (t < horizon) {
    timeline.instants.push_back(t);
    t += stream.exponential(interjump_mean);
  }
  timeline.instants.push_back(horizon);
  return timeline;
}

void sample_interjump_endpoint(std::span<const double> x_prev, std::span<const double> drift,
                               const DiffusionMatrix& diffusion, double tau, RngStream& stream,
                               std::span<double> out) {
  if (!(tau > 0.0)) throw std::invalid_argument("sample_interjump_endpoint: tau must be > 0");
  const std::size_t n = diffusion.size();
  if (x_prev.size() != n || drift.size() != n || out.size() != n)
    throw std::invalid_argument("sample_interjump_endpoint: size mismatch");

  // One shared standard normal vector; row i of the diffusion matrix maps
  // it to firm i so the cross-firm increment covariance is tau * sigma sigma^T.
  const double sqrt_tau = std::sqrt(tau);
  double z_small[8];
  std::vector<double> z_heap;
  std::span<double> z;
  if (n <= 8) {
    z = std::span<double>(z_small, n);
  } else {
    z_heap.resize(n);
    z = z_heap;
  }
  for (std::size_t k = 0; k < n; ++k) z[k] = stream.normal();

  for (std::size_t i = 0; i < n; ++i) {
    double diff = 0.0;
    auto row = diffusion.row(i);
    for (std::size_t k = 0; k < n; ++k) diff += row[k] * z[k];
    out[i] = x_prev[i] + drift[i] * tau + sqrt_tau * diff;
  }
}

void sample_jump_sizes(std::span<const FirmSpec> firms, RngStream& stream,
                       std::span<double> out) {
  if (firms.size() != out.size())
    throw std::invalid_argument("sample_jump_sizes: size mismatch");
  for (std::size_t i = 0; i < firms.size(); ++i)
    out[i] = firms[i].jump_mean + firms[i].jump_sd * stream.normal();
}

// ---------------------------------------------------------------------------
// Sum-of-uniforms construction.
//
// S = U + a*U0 has the trapezoidal density (min(a,s) - max(0,s-1))/a on
// [0, 1+a]. With c = min(1,a), d = max(1,a) its CDF is
//   F(s) = s^2 / (2a)            on [0, c]
//        = c (2s - c) / (2a)     on [c, d]
//        = 1 - (1+a-s)^2 / (2a)  on [d, 1+a]
// and F(S) is exactly uniform on [0,1].
// ---------------------------------------------------------------------------

double SumOfUniforms::transform(double s) const {
  const double a = a_;
  if (a == 0.0) return std::clamp(s, 0.0, 1.0);
  const double c = std::min(1.0, a);
  const double d = std::max(1.0, a);
  const double top = 1.0 + a;
  double f;
  if (s <= 0.0)
    f = 0.0;
  else if (s <= c)
    f = s * s / (2.0 * a);
  else if (s <= d)
    f = c * (2.0 * s - c) / (2.0 * a);
  else if (s < top)
    f = 1.0 - (top - s) * (top - s) / (2.0 * a);
  else
    f = 1.0;
  return std::clamp(f, 0.0, 1.0);
}

namespace {

// Antiderivative of the trapezoidal CDF above: psi(x) = integral_0^x F.
double cdf_antiderivative(double x, double a) {
  const double c = std::min(1.0, a);
  const double d = std::max(1.0, a);
  const double top = 1.0 + a;
  if (x <= 0.0) return 0.0;
  if (x <= c) return x * x * x / (6.0 * a);
  const double psi_c = c * c * c / (6.0 * a);
  if (x <= d) return psi_c + c * (x * x - c * x) / (2.0 * a);
  const double psi_d = psi_c + c * (d * d - c * d) / (2.0 * a);
  if (x <= top) {
    const double lc = top - x;  // in [0, c]
    return psi_d + (x - d) + (lc * lc * lc - c * c * c) / (6.0 * a);
  }
  return psi_d + (top - d) + (0.0 - c * c * c) / (6.0 * a) + (x - top);
}

// m(w) = E_U[ F(U + w) ] for w in [0, a]; piecewise cubic in w.
double conditional_mean(double w, double a) {
  return cdf_antiderivative(1.0 + w, a) - cdf_antiderivative(w, a);
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 15,
// enough for the piecewise degree-6 integrand m(w)^2.
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

double SumOfUniforms::pair_correlation(double a) {
  if (!(a >= 0.0)) throw std::invalid_argument("pair_correlation: a must be >= 0");
  if (a == 0.0) return 0.0;

  // Breakpoints of the piecewise-polynomial m(w) on [0, a].
  const double c = std::min(1.0, a);
  const double d = std::max(1.0, a);
  double knots[6] = {0.0, a, c, d, c - 1.0, d - 1.0};
  std::vector<double> pts;
  for (double k : knots)
    if (k > 0.0 && k < a) pts.push_back(k);
  pts.push_back(0.0);
  pts.push_back(a);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // E[m(W)^2] with W = a*U0 uniform on [0, a].
  double acc = 0.0;
  for (std::size_t seg = 0; seg + 1 < pts.size(); ++seg) {
    const double lo = pts[seg], hi = pts[seg + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double s = 0.0;
    for (int q = 0; q < 8; ++q) {
      const double m = conditional_mean(mid + half * kGlNode[q], a);
      s += kGlWeight[q] * m * m;
    }
    acc += s * half;
  }
  const double second_moment = acc / a;

  // Cov(F(S_i), F(S_j)) = E[m^2] - 1/4; each marginal has variance 1/12.
  return std::clamp(12.0 * (second_moment - 0.25), 0.0, 1.0);
}

SumOfUniforms SumOfUniforms::calibrate(double target_corr) {
  if (!(target_corr >= 0.0 && target_corr < 1.0))
    throw std::invalid_argument("calibrate_mixing: target correlation must lie in [0, 1)");
  if (target_corr <= 1e-12) return SumOfUniforms(0.0);

  double lo = 0.0, hi = 1.0;
  while (pair_correlation(hi) < target_corr) {
    hi *= 2.0;
    if (hi > 1e6) {
      std::ostringstream os;
      os << "calibrate_mixing: target correlation " << target_corr
         << " saturates the construction (max attainable approx "
         << pair_correlation(1e6) << ")";
      throw numeric_error(os.str());
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rho = pair_correlation(mid);
    if (std::abs(rho - target_corr) < 1e-9) return SumOfUniforms(mid);
    (rho < target_corr ? lo : hi) = mid;
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return SumOfUniforms(0.5 * (lo + hi));
}

void SumOfUniforms::sample(RngStream& stream, std::span<double> out) const {
  // The shared draw is consumed even when a_ == 0 or out is a single slot,
  // keeping stream alignment independent of the active firm count.
  const double u0 = stream.uniform();
  for (double& slot : out) {
    const double u = stream.uniform();
    const double v = (a_ == 0.0) ? u : transform(u + a_ * u0);
    // Guard against exact 0/1 so downstream open-interval logic stays valid.
    slot = std::clamp(v, 0x1p-53, 1.0 - 0x1p-53);
  }
}

void sample_correlated_uniforms(std::size_t n, double target_corr, RngStream& stream,
                                std::span<double> out) {
  if (out.size() != n) throw std::invalid_argument("sample_correlated_uniforms: size mismatch");
  const SumOfUniforms sou = SumOfUniforms::calibrate(target_corr);
  sou.sample(stream, out);
}

double equicorrelated_target(std::span<const double> pairwise_targets,
                             std::vector<std::string>* warn) {
  if (pairwise_targets.empty()) return 0.0;
  const auto [mn, mx] = std::minmax_element(pairwise_targets.begin(), pairwise_targets.end());
  double sum = 0.0;
  for (double t : pairwise_targets) sum += t;
  const double avg = sum / static_cast<double>(pairwise_targets.size());
  if (warn && *mx - *mn > 1e-6) {
    std::ostringstream os;
    os << "pairwise correlation targets differ (min " << *mn << ", max " << *mx
       << "); only the equicorrelated case is supported, using the average " << avg;
    warn->push_back(os.str());
  }
  return std::clamp(avg, 0.0, 1.0 - 1e-9);
}

}  // namespace fptmc
