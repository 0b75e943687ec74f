#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fptmc/model.hpp"

namespace fptmc {

struct EngineSettings {
  std::size_t runs = 10000;
  std::uint64_t seed = 0;
  double dt = 0.005;       // discretized-baseline step
  std::size_t grid = 512;  // evaluation grid points on [0, T]
  unsigned workers = 0;    // 0 = hardware concurrency
};

struct ReportSettings {
  std::vector<double> horizons;  // defaults to integer years up to the horizon
  std::string reference;         // "zhou_aa" adds the fixed two-firm reference column
};

struct CalibrationConfig {
  std::size_t sim_runs = 20000;
  std::size_t confirm_runs = 100000;
  std::size_t max_evaluations = 500;
  double diameter_tol = 1e-5;
  std::vector<double> init;  // 4 entries; meaning depends on --mode
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
};

struct Config {
  PortfolioSpec portfolio;
  EngineSettings engine;
  ReportSettings report;
  std::optional<CalibrationConfig> calibration;
  std::vector<std::string> warnings;
};

// Parses the key-value/section configuration text. `origin` names the
// source in diagnostics. Throws config_error with line context on schema
// violations and re-validates the assembled portfolio.
Config parse_config(const std::string& text, const std::string& origin);

// Reads and parses the file at path. Throws config_error when missing.
Config load_config(const std::string& path);

}  // namespace fptmc
