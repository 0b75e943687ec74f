#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fptmc {

// One firm of the portfolio. Values live in log-asset units: the firm
// defaults when X(t) = ln V(t) first reaches the moving boundary
// D(t) = gamma*t + kappa_log.
struct FirmSpec {
  double x0 = 0.0;         // X(0), initial log-asset value
  double mu = 0.0;         // drift per unit time
  double kappa_log = 0.0;  // ln(kappa), log liability level
  double gamma = 0.0;      // liability growth rate per unit time
  double jump_mean = 0.0;  // mean jump size (log units)
  double jump_sd = 1.0;    // jump size standard deviation, > 0

  // Drift of the boundary-shifted process Y(t) = X(t) - gamma*t - kappa_log,
  // which crosses the constant level 0 exactly when X crosses D(t).
  double shifted_drift() const { return mu - gamma; }
  // Y(0); must be positive (the firm starts above its boundary).
  double shifted_start() const { return x0 - kappa_log; }

  void validate(std::size_t index = 0) const;
};

// D(t) = gamma*t + ln(kappa)
double threshold_level(const FirmSpec& firm, double t);

// Row i holds the loadings (sigma_i1 .. sigma_iN) of firm i on the N
// independent Brownian drivers. Stored row-major.
class DiffusionMatrix {
 public:
  DiffusionMatrix() = default;
  explicit DiffusionMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}
  DiffusionMatrix(std::size_t n, std::vector<double> entries);

  static DiffusionMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * n_, n_);
  }

  // Every row must have a strictly positive Euclidean norm.
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

// Effective per-firm volatility: the Euclidean norm of row i.
double effective_vol(const DiffusionMatrix& diffusion, std::size_t i);

// Correlation of the diffusion parts of firms i and j:
// row_i . row_j / (|row_i| |row_j|). Requires i != j and nonzero rows.
double diffusion_correlation(const DiffusionMatrix& diffusion, std::size_t i, std::size_t j);

// Lower-triangular factor L with L L^T = h0 (row-major n x n input).
// Throws numeric_error when h0 is not symmetric positive definite.
DiffusionMatrix decompose_covariance(std::size_t n, std::span<const double> h0);

// Convenience for the two-firm (sigma1, sigma2, rho) covariance shorthand.
DiffusionMatrix diffusion_from_vol_corr(double sigma1, double sigma2, double rho);

struct PortfolioSpec {
  std::vector<FirmSpec> firms;
  DiffusionMatrix diffusion;
  double lambda = 0.0;          // jump arrival intensity (reporting alias; 0 disables jumps)
  double interjump_mean = 1.0;  // mean of the exponential interjump times
  double horizon = 1.0;         // T

  // Optional override for the correlated-uniform target used by the
  // sampling engine; defaults to the mean pairwise diffusion correlation.
  std::optional<double> corr_target;

  std::size_t size() const { return firms.size(); }

  // Throws on violated invariants; returns non-fatal warnings
  // (e.g. lambda * interjump_mean != 1).
  std::vector<std::string> validate() const;

  // Equicorrelation target for the correlated uniforms: the override if
  // set, otherwise the average pairwise diffusion correlation, clamped
  // to [0, 1). Returns 0 for a single firm.
  double uniform_corr_target() const;
};

}  // namespace fptmc
