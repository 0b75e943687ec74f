#include "fptmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fptmc/errors.hpp"

namespace fptmc {

void FirmSpec::validate(std::size_t index) const {
  auto fail = [&](const std::string& msg) {
    std::ostringstream os;
    os << "firm " << index << ": " << msg;
    throw std::invalid_argument(os.str());
  };
  if (!(jump_sd > 0.0)) fail("jump_sd must be > 0");
  if (!(x0 > kappa_log)) fail("x0 must start above the threshold gamma*0 + kappa_log");
  if (!std::isfinite(x0) || !std::isfinite(mu) || !std::isfinite(kappa_log) ||
      !std::isfinite(gamma) || !std::isfinite(jump_mean) || !std::isfinite(jump_sd))
    fail("parameters must be finite");
}

double threshold_level(const FirmSpec& firm, double t) {
  if (t < 0.0) throw std::invalid_argument("threshold_level: t must be >= 0");
  return firm.gamma * t + firm.kappa_log;
}

DiffusionMatrix::DiffusionMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_)
    throw std::invalid_argument("DiffusionMatrix: entries must be n*n row-major");
}

DiffusionMatrix DiffusionMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  DiffusionMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw std::invalid_argument("DiffusionMatrix: matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void DiffusionMatrix::validate() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (!(effective_vol(*this, i) > 0.0)) {
      std::ostringstream os;
      os << "diffusion row " << i << " has zero norm (effective volatility must be > 0)";
      throw std::invalid_argument(os.str());
    }
  }
}

double effective_vol(const DiffusionMatrix& diffusion, std::size_t i) {
  if (i >= diffusion.size()) throw std::invalid_argument("effective_vol: bad firm index");
  double sum = 0.0;
  for (double v : diffusion.row(i)) sum += v * v;
  const double s = std::sqrt(sum);
  if (!(s > 0.0)) throw numeric_error("effective_vol: all-zero diffusion row");
  return s;
}

double diffusion_correlation(const DiffusionMatrix& diffusion, std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("diffusion_correlation: i must differ from j");
  const double si = effective_vol(diffusion, i);
  const double sj = effective_vol(diffusion, j);
  double dot = 0.0;
  auto ri = diffusion.row(i);
  auto rj = diffusion.row(j);
  for (std::size_t k = 0; k < ri.size(); ++k) dot += ri[k] * rj[k];
  return std::clamp(dot / (si * sj), -1.0, 1.0);
}

DiffusionMatrix decompose_covariance(std::size_t n, std::span<const double> h0) {
  if (h0.size() != n * n)
    throw std::invalid_argument("decompose_covariance: h0 must be n*n row-major");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(h0[i * n + j] - h0[j * n + i]) >
          1e-12 * std::max(1.0, std::abs(h0[i * n + j])))
        throw numeric_error("decompose_covariance: h0 is not symmetric");

  DiffusionMatrix chol(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = h0[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= chol(i, k) * chol(j, k);
      if (i == j) {
        if (!(sum > 0.0))
          throw numeric_error("decompose_covariance: h0 is not positive definite");
        chol(i, i) = std::sqrt(sum);
      } else {
        chol(i, j) = sum / chol(j, j);
      }
    }
  }
  return chol;
}

DiffusionMatrix diffusion_from_vol_corr(double sigma1, double sigma2, double rho) {
  const double h0[4] = {sigma1 * sigma1, rho * sigma1 * sigma2,
                        rho * sigma1 * sigma2, sigma2 * sigma2};
  return decompose_covariance(2, std::span<const double>(h0, 4));
}

std::vector<std::string> PortfolioSpec::validate() const {
  if (firms.empty()) throw std::invalid_argument("portfolio: at least one firm required");
  if (diffusion.size() != firms.size())
    throw std::invalid_argument("portfolio: diffusion matrix must be N x N for N firms");
  for (std::size_t i = 0; i < firms.size(); ++i) firms[i].validate(i);
  diffusion.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("portfolio: horizon must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("portfolio: lambda must be >= 0");
  if (!(interjump_mean > 0.0))
    throw std::invalid_argument("portfolio: interjump_mean must be > 0");
  if (corr_target && !(*corr_target >= 0.0 && *corr_target < 1.0))
    throw std::invalid_argument("portfolio: corr_target must lie in [0, 1)");

  std::vector<std::string> warnings;
  if (lambda > 0.0 && std::abs(lambda * interjump_mean - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "lambda (" << lambda << ") and interjump_mean (" << interjump_mean
       << ") are inconsistent for a Poisson arrival process (lambda*interjump_mean != 1); "
          "interjump_mean drives the simulated timeline";
    warnings.push_back(os.str());
  }
  return warnings;
}

double PortfolioSpec::uniform_corr_target() const {
  if (corr_target) return std::clamp(*corr_target, 0.0, 1.0 - 1e-9);
  const std::size_t n = firms.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += diffusion_correlation(diffusion, i, j);
      ++pairs;
    }
  return std::clamp(sum / static_cast<double>(pairs), 0.0, 1.0 - 1e-9);
}

}  // namespace fptmc
