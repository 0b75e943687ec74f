#include "fptmc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fptmc/errors.hpp"
#include "fptmc/version.hpp"

namespace fptmc {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: '\n' line endings everywhere
  if (!out) throw io_error("cannot open for writing: " + path);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_density_csv(const std::string& path, const std::vector<DensityEstimate>& per_firm) {
  if (per_firm.empty()) throw std::invalid_argument("write_density_csv: no firms");
  auto out = open_out(path);
  out << "t";
  for (std::size_t i = 0; i < per_firm.size(); ++i) out << ",firm_" << i;
  out << "\n";
  const auto& grid = per_firm[0].grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << format_double(grid[k]);
    for (const auto& d : per_firm) out << "," << format_double(d.values[k]);
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_rates_csv(const std::string& path, const std::vector<RateCurve>& per_firm) {
  if (per_firm.empty()) throw std::invalid_argument("write_rates_csv: no firms");
  auto out = open_out(path);
  out << "t";
  for (std::size_t i = 0; i < per_firm.size(); ++i) out << ",firm_" << i;
  out << "\n";
  const auto& grid = per_firm[0].grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << format_double(grid[k]);
    for (const auto& c : per_firm) out << "," << format_double(c.rates[k]);
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_correlations_csv(const std::string& path,
                            const std::vector<CorrelationReport>& reports,
                            const std::map<double, double>* reference) {
  auto out = open_out(path);
  out << "horizon,pair,rho,p_a,p_b,p_ab,stderr";
  if (reference) out << ",ref_rho";
  out << "\n";
  for (const auto& rep : reports) {
    for (const auto& pt : rep.points) {
      out << format_double(pt.horizon) << "," << rep.firm_a << "-" << rep.firm_b << ","
          << format_double(pt.rho) << "," << format_double(pt.p_a) << ","
          << format_double(pt.p_b) << "," << format_double(pt.p_ab) << ","
          << format_double(pt.stderr_rho);
      if (reference) {
        out << ",";
        const auto it = reference->find(pt.horizon);
        if (it != reference->end()) out << format_double(it->second);
      }
      out << "\n";
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows) {
  auto out = open_out(path);
  out << "engine,bandwidth,runs,total_seconds,per_run_seconds,speedup\n";
  for (const auto& r : rows) {
    out << r.engine << ",";
    if (r.bandwidth) out << format_double(*r.bandwidth);
    out << "," << r.runs << "," << format_double(r.total_seconds) << ","
        << format_double(r.per_run_seconds) << ",";
    if (r.speedup) out << format_double(*r.speedup);
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_compare_csv(const std::string& path, const std::vector<CompareSeries>& series,
                       std::size_t n_firms) {
  auto out = open_out(path);
  const bool with_firm = n_firms > 1;
  out << (with_firm ? "engine,firm,t,value\n" : "engine,t,value\n");
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.curve->grid.size(); ++k) {
      out << s.engine << ",";
      if (with_firm) out << s.firm << ",";
      out << format_double(s.curve->grid[k]) << "," << format_double(s.curve->rates[k]) << "\n";
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_calibration_json(const std::string& path, const std::string& mode,
                            const CalibrationResult& result,
                            const std::vector<double>& report_horizons) {
  nlohmann::json j;
  j["artifact_version"] = kVersion;
  j["mode"] = mode;
  j["seed"] = result.seed;
  j["evaluations"] = result.evaluations;
  j["objective_value"] = result.objective_value;
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t k = 0; k < result.params.size(); ++k)
    params[result.param_names[k]] = result.params[k];
  j["params"] = params;
  if (result.sigma1) {
    j["derived"] = {{"sigma1", *result.sigma1},
                    {"sigma2", *result.sigma2},
                    {"rho12", *result.rho12}};
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [x, fx] : result.trace) trace.push_back({{"params", x}, {"loss", fx}});
  j["trace"] = trace;

  j["confirmation"]["objective_value"] = result.confirmed_objective;
  nlohmann::json rates = nlohmann::json::array();
  for (std::size_t i = 0; i < result.confirmed_rates.size(); ++i) {
    nlohmann::json firm = nlohmann::json::object();
    firm["firm"] = i;
    nlohmann::json pts = nlohmann::json::array();
    for (double t : report_horizons)
      pts.push_back({{"t", t}, {"rate", result.confirmed_rates[i].at(t)}});
    firm["rates"] = pts;
    rates.push_back(firm);
  }
  j["confirmation"]["rates"] = rates;

  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

void write_manifest(const std::string& path, const Config& config, const std::string& command,
                    const std::string& engine, std::size_t n_runs,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["artifact_version"] = kVersion;
  j["command"] = command;
  j["engine"] = engine;
  j["seed"] = config.engine.seed;
  j["n_runs"] = n_runs;
  j["outputs"] = outputs;

  nlohmann::json port;
  port["horizon"] = config.portfolio.horizon;
  port["lambda"] = config.portfolio.lambda;
  port["interjump_mean"] = config.portfolio.interjump_mean;
  if (config.portfolio.corr_target) port["corr_target"] = *config.portfolio.corr_target;
  nlohmann::json firms = nlohmann::json::array();
  for (const auto& f : config.portfolio.firms) {
    firms.push_back({{"x0", f.x0},
                     {"mu", f.mu},
                     {"gamma", f.gamma},
                     {"ln_kappa", f.kappa_log},
                     {"jump_mean", f.jump_mean},
                     {"jump_sd", f.jump_sd}});
  }
  port["firms"] = firms;
  nlohmann::json rows = nlohmann::json::array();
  const auto& d = config.portfolio.diffusion;
  for (std::size_t i = 0; i < d.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < d.size(); ++k) row.push_back(d(i, k));
    rows.push_back(row);
  }
  port["diffusion"] = rows;
  j["portfolio"] = port;

  j["settings"] = {{"runs", config.engine.runs},
                   {"seed", config.engine.seed},
                   {"dt", config.engine.dt},
                   {"grid", config.engine.grid},
                   {"horizons", config.report.horizons}};

  auto out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

HistoricalCurve read_historical_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open historical CSV: " + path);

  HistoricalCurve curve;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (line == 1) {
      if (s != "t,rate")
        throw io_error(path + ":1: expected header 't,rate', got '" + s + "'");
      continue;
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos)
      throw io_error(path + ":" + std::to_string(line) + ": expected 't,rate' row");
    const std::string ts = trim(s.substr(0, comma));
    const std::string rs = trim(s.substr(comma + 1));
    double t = 0.0, r = 0.0;
    auto res_t = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    auto res_r = std::from_chars(rs.data(), rs.data() + rs.size(), r);
    if (res_t.ec != std::errc() || res_t.ptr != ts.data() + ts.size() ||
        res_r.ec != std::errc() || res_r.ptr != rs.data() + rs.size())
      throw io_error(path + ":" + std::to_string(line) + ": malformed row '" + s + "'");
    curve.times.push_back(t);
    curve.rates.push_back(r);
  }
  if (curve.times.empty()) throw io_error(path + ": no data rows");
  return curve;
}

}  // namespace fptmc
