#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fptmc/calibrate.hpp"
#include "fptmc/config.hpp"
#include "fptmc/estimate.hpp"

namespace fptmc {

// Shortest round-trip decimal rendering (locale-independent).
std::string format_double(double v);

// density.csv / rates.csv: column t plus one column per firm.
void write_density_csv(const std::string& path, const std::vector<DensityEstimate>& per_firm);
void write_rates_csv(const std::string& path, const std::vector<RateCurve>& per_firm);

// correlations.csv: horizon,pair,rho,p_a,p_b,p_ab,stderr with an optional
// fixed reference column keyed by horizon.
void write_correlations_csv(const std::string& path,
                            const std::vector<CorrelationReport>& reports,
                            const std::map<double, double>* reference = nullptr);

struct TimingRow {
  std::string engine;
  std::optional<double> bandwidth;
  std::size_t runs = 0;
  double total_seconds = 0.0;
  double per_run_seconds = 0.0;
  std::optional<double> speedup;  // euler per-run time / this engine's
};
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows);

// compare.csv long format: engine,t,value for a single firm,
// engine,firm,t,value otherwise.
struct CompareSeries {
  std::string engine;
  std::size_t firm = 0;
  const RateCurve* curve = nullptr;
};
void write_compare_csv(const std::string& path, const std::vector<CompareSeries>& series,
                       std::size_t n_firms);

void write_calibration_json(const std::string& path, const std::string& mode,
                            const CalibrationResult& result,
                            const std::vector<double>& report_horizons);

// Deterministic manifest: full config echo, seed, engine, run counts and the
// produced files. Timing measurements go to timing.csv, not here, so
// re-running a command yields a byte-identical manifest.
void write_manifest(const std::string& path, const Config& config, const std::string& command,
                    const std::string& engine, std::size_t n_runs,
                    const std::vector<std::string>& outputs);

// historical CSV: header `t,rate`, one row per horizon. Throws io_error
// naming the offending line on malformed input.
HistoricalCurve read_historical_csv(const std::string& path);

}  // namespace fptmc
