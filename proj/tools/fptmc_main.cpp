// fptmc: first-passage-time Monte Carlo for correlated jump-diffusion
// portfolios. Subcommands: simulate, correlate, calibrate, compare.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fptmc/baseline.hpp"
#include "fptmc/calibrate.hpp"
#include "fptmc/config.hpp"
#include "fptmc/errors.hpp"
#include "fptmc/estimate.hpp"
#include "fptmc/io.hpp"
#include "fptmc/unif.hpp"
#include "fptmc/version.hpp"

namespace fs = std::filesystem;
using namespace fptmc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string engine = "unif";
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_engine) {
  cmd->add_option("--config", args.config_path, "configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  if (with_engine)
    cmd->add_option("--engine", args.engine, "engine: unif or euler")
        ->check(CLI::IsMember({"unif", "euler"}));
  cmd->add_option("--runs", args.runs, "override the configured run count");
  cmd->add_option("--seed", args.seed, "override the configured seed");
  cmd->add_option("--workers", args.workers, "worker threads (0 = hardware)");
}

Config load_and_override(const CommonArgs& args) {
  Config cfg = load_config(args.config_path);
  if (args.runs) cfg.engine.runs = *args.runs;
  if (args.seed) cfg.engine.seed = *args.seed;
  if (args.workers) cfg.engine.workers = *args.workers;
  if (cfg.engine.runs < 1) throw config_error("n_runs must be >= 1");
  for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct EngineRun {
  SampleSet set;
  double seconds = 0.0;
  std::vector<FirmEstimate> estimates;
};

EngineRun run_engine(const Config& cfg, const std::string& engine) {
  EngineRun out;
  const auto t0 = std::chrono::steady_clock::now();
  if (engine == "euler") {
    EulerConfig ec;
    ec.dt = cfg.engine.dt;
    ec.n_runs = cfg.engine.runs;
    ec.seed = cfg.engine.seed;
    ec.workers = cfg.engine.workers;
    out.set = euler_simulate(cfg.portfolio, ec);
  } else {
    out.set = simulate(cfg.portfolio, cfg.engine.runs, cfg.engine.seed, cfg.engine.workers);
  }
  out.seconds = wall_seconds(t0);  // engine only; estimation and I/O excluded

  const auto grid = uniform_grid(cfg.portfolio.horizon, cfg.engine.grid);
  for (std::size_t i = 0; i < cfg.portfolio.size(); ++i)
    out.estimates.push_back(estimate_firm(out.set, i, grid));
  return out;
}

std::optional<double> primary_bandwidth(const EngineRun& run) {
  if (run.estimates.empty() || run.estimates[0].density.bandwidth <= 0.0) return std::nullopt;
  return run.estimates[0].density.bandwidth;
}

int cmd_simulate(const CommonArgs& args) {
  Config cfg;
  try {
    cfg = load_and_override(args);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  EngineRun run;
  try {
    run = run_engine(cfg, args.engine);
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }

  try {
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    std::vector<DensityEstimate> densities;
    std::vector<RateCurve> rates;
    for (const auto& est : run.estimates) {
      densities.push_back(est.density);
      rates.push_back(est.rates);
    }
    write_density_csv((out / "density.csv").string(), densities);
    write_rates_csv((out / "rates.csv").string(), rates);
    TimingRow row{args.engine, primary_bandwidth(run), cfg.engine.runs, run.seconds,
                  run.seconds / static_cast<double>(cfg.engine.runs), std::nullopt};
    write_timing_csv((out / "timing.csv").string(), {row});
    write_manifest((out / "manifest.json").string(), cfg, "simulate", args.engine,
                   cfg.engine.runs, {"density.csv", "rates.csv", "timing.csv"});
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

int cmd_correlate(const CommonArgs& args) {
  Config cfg;
  try {
    cfg = load_and_override(args);
    if (cfg.portfolio.size() < 2)
      throw config_error("correlate requires at least two firms");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<CorrelationReport> reports;
  try {
    EngineRun run = run_engine(cfg, args.engine);
    for (std::size_t a = 0; a < cfg.portfolio.size(); ++a) {
      for (std::size_t b = a + 1; b < cfg.portfolio.size(); ++b) {
        CorrelationReport rep;
        rep.firm_a = a;
        rep.firm_b = b;
        for (double t : cfg.report.horizons)
          rep.points.push_back(default_correlation(run.set, a, b, t));
        reports.push_back(std::move(rep));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }

  try {
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    // Fixed reference values for the two-A-rated-firm case (closed-form
    // column of the published comparison table).
    const std::map<double, double> zhou_aa = {
        {1.0, 0.0000}, {2.0, 0.0002}, {5.0, 0.0165}, {10.0, 0.0775}};
    const bool with_ref = cfg.report.reference == "zhou_aa";
    write_correlations_csv((out / "correlations.csv").string(), reports,
                           with_ref ? &zhou_aa : nullptr);
    write_manifest((out / "manifest.json").string(), cfg, "correlate", args.engine,
                   cfg.engine.runs, {"correlations.csv"});
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

int cmd_compare(const CommonArgs& args) {
  Config cfg;
  try {
    cfg = load_and_override(args);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  EngineRun unif_run, euler_run;
  std::vector<RateCurve> closed_form;
  try {
    unif_run = run_engine(cfg, "unif");
    euler_run = run_engine(cfg, "euler");
    // No-jump closed form at z = (X(0) - ln kappa) / sigma_i per firm.
    const auto grid = uniform_grid(cfg.portfolio.horizon, cfg.engine.grid);
    for (std::size_t i = 0; i < cfg.portfolio.size(); ++i) {
      const double z = cfg.portfolio.firms[i].shifted_start() /
                       effective_vol(cfg.portfolio.diffusion, i);
      RateCurve c;
      c.grid = grid;
      c.rates.resize(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k)
        c.rates[k] = grid[k] > 0.0 ? nojump_default_probability(z, grid[k]) : 0.0;
      closed_form.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }

  try {
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);

    std::vector<CompareSeries> series;
    std::vector<RateCurve> unif_rates, euler_rates;
    for (const auto& est : unif_run.estimates) unif_rates.push_back(est.rates);
    for (const auto& est : euler_run.estimates) euler_rates.push_back(est.rates);
    for (std::size_t i = 0; i < cfg.portfolio.size(); ++i) {
      series.push_back({"unif", i, &unif_rates[i]});
      series.push_back({"euler", i, &euler_rates[i]});
      series.push_back({"closed_form", i, &closed_form[i]});
    }
    write_compare_csv((out / "compare.csv").string(), series, cfg.portfolio.size());

    const double n = static_cast<double>(cfg.engine.runs);
    const double unif_per_run = unif_run.seconds / n;
    const double euler_per_run = euler_run.seconds / n;
    std::vector<TimingRow> rows;
    rows.push_back({"unif", primary_bandwidth(unif_run), cfg.engine.runs, unif_run.seconds,
                    unif_per_run, euler_per_run / unif_per_run});
    rows.push_back({"euler", primary_bandwidth(euler_run), cfg.engine.runs, euler_run.seconds,
                    euler_per_run, std::nullopt});
    write_timing_csv((out / "timing.csv").string(), rows);
    write_manifest((out / "manifest.json").string(), cfg, "compare", "unif+euler",
                   cfg.engine.runs, {"compare.csv", "timing.csv"});
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

int cmd_calibrate(const CommonArgs& args, const std::vector<std::string>& historical_paths,
                  const std::string& mode) {
  Config cfg;
  std::vector<HistoricalCurve> curves;
  try {
    cfg = load_and_override(args);
    if (!cfg.calibration)
      throw config_error("calibrate requires a [calibration] section with an init vector");
    if (historical_paths.empty()) throw config_error("--historical is required");
    for (const auto& p : historical_paths) {
      curves.push_back(read_historical_csv(p));
      curves.back().validate(&cfg.warnings);
    }
    if (mode == "pair") {
      if (curves.size() == 1) curves.push_back(curves[0]);  // same-rated pair
      if (curves.size() != 2) throw config_error("pair mode takes one or two historical curves");
      if (cfg.portfolio.size() != 2) throw config_error("pair mode requires a two-firm config");
    } else if (curves.size() != 1) {
      throw config_error("single mode takes exactly one historical curve");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CalibrationResult result;
  try {
    const CalibrationConfig& cal = *cfg.calibration;
    CalibrationSettings settings;
    settings.sim_runs = cal.sim_runs;
    settings.confirm_runs = cal.confirm_runs;
    settings.max_evaluations = cal.max_evaluations;
    settings.diameter_tol = cal.diameter_tol;
    settings.seed = cfg.engine.seed;
    settings.workers = cfg.engine.workers;
    settings.interjump_mean = cfg.portfolio.interjump_mean;
    settings.lower = cal.lower;
    settings.upper = cal.upper;
    const std::array<double, 4> init = {cal.init[0], cal.init[1], cal.init[2], cal.init[3]};

    if (mode == "pair") {
      JumpParams jumps;
      jumps.lambda = cfg.portfolio.lambda;
      jumps.jump_mean = cfg.portfolio.firms[0].jump_mean;
      jumps.jump_sd = cfg.portfolio.firms[0].jump_sd;
      result = calibrate_pair(curves[0], curves[1], jumps, init, settings);
    } else {
      result = calibrate_single_firm(curves[0], init, settings);
    }
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }

  try {
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    write_calibration_json((out / "calibration.json").string(), mode, result,
                           cfg.report.horizons);
    write_manifest((out / "manifest.json").string(), cfg, "calibrate", "unif",
                   cfg.calibration->sim_runs, {"calibration.json"});
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-passage-time Monte Carlo engine for correlated jump-diffusion portfolios"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs sim_args, corr_args, cal_args, cmp_args;
  std::vector<std::string> historical_paths;
  std::string mode = "single";

  CLI::App* sim = app.add_subcommand("simulate", "estimate densities and cumulative default rates");
  add_common(sim, sim_args, true);

  CLI::App* corr = app.add_subcommand("correlate", "pairwise default correlations at horizons");
  add_common(corr, corr_args, true);

  CLI::App* cal = app.add_subcommand("calibrate", "fit model parameters to historical curves");
  add_common(cal, cal_args, false);
  cal->add_option("--historical", historical_paths, "historical rate CSV (t,rate)")
      ->required();
  cal->add_option("--mode", mode, "single or pair")->check(CLI::IsMember({"single", "pair"}));

  CLI::App* cmp = app.add_subcommand("compare", "UNIF vs discretized baseline vs closed form");
  add_common(cmp, cmp_args, false);

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return cmd_simulate(sim_args);
  if (corr->parsed()) return cmd_correlate(corr_args);
  if (cal->parsed()) return cmd_calibrate(cal_args, historical_paths, mode);
  if (cmp->parsed()) return cmd_compare(cmp_args);
  return 0;
}
