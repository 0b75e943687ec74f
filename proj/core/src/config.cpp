#include "fptmc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fptmc/errors.hpp"

namespace fptmc {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw config_error(os.str());
}

double parse_number(const std::string& origin, const Entry& e) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(origin, e.line, "expected a number for '" + e.key + "', got '" + v + "'");
  return out;
}

std::vector<double> parse_number_list(const std::string& origin, const Entry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(origin, e.line, "empty element in list for '" + e.key + "'");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      fail(origin, e.line, "expected a number in list for '" + e.key + "', got '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(origin, e.line, "empty list for '" + e.key + "'");
  return out;
}

std::vector<Section> tokenize(const std::string& text, const std::string& origin) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      sections.push_back({trim(s.substr(1, s.size() - 2)), line, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    if (sections.empty()) fail(origin, line, "key outside of any [section]");
    Entry e;
    e.key = trim(s.substr(0, eq));
    e.value = trim(s.substr(eq + 1));
    e.line = line;
    if (e.key.empty()) fail(origin, line, "empty key");
    sections.back().entries.push_back(std::move(e));
  }
  return sections;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& origin) {
  const std::vector<Section> sections = tokenize(text, origin);
  Config cfg;

  const Section* portfolio_sec = nullptr;
  const Section* diffusion_sec = nullptr;
  const Section* engine_sec = nullptr;
  const Section* report_sec = nullptr;
  const Section* calibration_sec = nullptr;
  const Section* correlation_sec = nullptr;
  std::vector<const Section*> firm_secs;

  for (const Section& sec : sections) {
    if (sec.name == "portfolio") portfolio_sec = &sec;
    else if (sec.name == "firm") firm_secs.push_back(&sec);
    else if (sec.name == "diffusion") diffusion_sec = &sec;
    else if (sec.name == "engine") engine_sec = &sec;
    else if (sec.name == "report") report_sec = &sec;
    else if (sec.name == "calibration") calibration_sec = &sec;
    else if (sec.name == "correlation") correlation_sec = &sec;
    else fail(origin, sec.line, "unknown section [" + sec.name + "]");
  }
  if (!portfolio_sec) throw config_error(origin + ": missing [portfolio] section");
  if (firm_secs.empty()) throw config_error(origin + ": at least one [firm] section required");
  if (!diffusion_sec) throw config_error(origin + ": missing [diffusion] section");

  // [portfolio]
  for (const Entry& e : portfolio_sec->entries) {
    if (e.key == "horizon") cfg.portfolio.horizon = parse_number(origin, e);
    else if (e.key == "lambda") cfg.portfolio.lambda = parse_number(origin, e);
    else if (e.key == "interjump_mean") cfg.portfolio.interjump_mean = parse_number(origin, e);
    else fail(origin, e.line, "unknown key '" + e.key + "' in [portfolio]");
  }

  // [firm] sections, in order
  for (const Section* sec : firm_secs) {
    FirmSpec firm;
    for (const Entry& e : sec->entries) {
      if (e.key == "x0") firm.x0 = parse_number(origin, e);
      else if (e.key == "mu") firm.mu = parse_number(origin, e);
      else if (e.key == "gamma") firm.gamma = parse_number(origin, e);
      else if (e.key == "ln_kappa") firm.kappa_log = parse_number(origin, e);
      else if (e.key == "jump_mean") firm.jump_mean = parse_number(origin, e);
      else if (e.key == "jump_sd") firm.jump_sd = parse_number(origin, e);
      else fail(origin, e.line, "unknown key '" + e.key + "' in [firm]");
    }
    cfg.portfolio.firms.push_back(firm);
  }
  const std::size_t n = cfg.portfolio.firms.size();

  // [diffusion]: explicit rows or the (sigma1, sigma2, rho) shorthand.
  {
    std::vector<std::vector<double>> rows;
    std::optional<double> s1, s2, rho;
    for (const Entry& e : diffusion_sec->entries) {
      if (e.key == "row") rows.push_back(parse_number_list(origin, e));
      else if (e.key == "sigma1") s1 = parse_number(origin, e);
      else if (e.key == "sigma2") s2 = parse_number(origin, e);
      else if (e.key == "rho") rho = parse_number(origin, e);
      else fail(origin, e.line, "unknown key '" + e.key + "' in [diffusion]");
    }
    if (!rows.empty()) {
      if (s1 || s2 || rho)
        fail(origin, diffusion_sec->line, "use either 'row' entries or the sigma1/sigma2/rho shorthand");
      if (rows.size() != n)
        fail(origin, diffusion_sec->line, "diffusion needs one row per firm");
      for (const auto& r : rows)
        if (r.size() != n)
          fail(origin, diffusion_sec->line, "each diffusion row needs one entry per firm");
      cfg.portfolio.diffusion = DiffusionMatrix::from_rows(rows);
    } else if (s1 && s2 && rho) {
      if (n != 2)
        fail(origin, diffusion_sec->line, "the sigma1/sigma2/rho shorthand requires exactly 2 firms");
      try {
        cfg.portfolio.diffusion = diffusion_from_vol_corr(*s1, *s2, *rho);
      } catch (const numeric_error& err) {
        fail(origin, diffusion_sec->line, std::string("invalid covariance shorthand: ") + err.what());
      }
    } else {
      fail(origin, diffusion_sec->line,
           "diffusion requires 'row' entries or all of sigma1/sigma2/rho");
    }
  }

  // [correlation]
  if (correlation_sec) {
    for (const Entry& e : correlation_sec->entries) {
      if (e.key == "target") cfg.portfolio.corr_target = parse_number(origin, e);
      else fail(origin, e.line, "unknown key '" + e.key + "' in [correlation]");
    }
  }

  // [engine]
  if (engine_sec) {
    for (const Entry& e : engine_sec->entries) {
      if (e.key == "runs") cfg.engine.runs = static_cast<std::size_t>(parse_number(origin, e));
      else if (e.key == "seed") cfg.engine.seed = static_cast<std::uint64_t>(parse_number(origin, e));
      else if (e.key == "dt") cfg.engine.dt = parse_number(origin, e);
      else if (e.key == "grid") cfg.engine.grid = static_cast<std::size_t>(parse_number(origin, e));
      else if (e.key == "workers") cfg.engine.workers = static_cast<unsigned>(parse_number(origin, e));
      else fail(origin, e.line, "unknown key '" + e.key + "' in [engine]");
    }
  }

  // [report]
  if (report_sec) {
    for (const Entry& e : report_sec->entries) {
      if (e.key == "horizons") cfg.report.horizons = parse_number_list(origin, e);
      else if (e.key == "reference") cfg.report.reference = trim(e.value);
      else fail(origin, e.line, "unknown key '" + e.key + "' in [report]");
    }
    if (!cfg.report.reference.empty() && cfg.report.reference != "none" &&
        cfg.report.reference != "zhou_aa")
      fail(origin, report_sec->line, "unknown reference '" + cfg.report.reference + "'");
  }
  if (cfg.report.horizons.empty()) {
    for (double t = 1.0; t <= cfg.portfolio.horizon + 1e-9; t += 1.0)
      cfg.report.horizons.push_back(t);
    if (cfg.report.horizons.empty()) cfg.report.horizons.push_back(cfg.portfolio.horizon);
  }

  // [calibration]
  if (calibration_sec) {
    CalibrationConfig cal;
    for (const Entry& e : calibration_sec->entries) {
      if (e.key == "sim_runs") cal.sim_runs = static_cast<std::size_t>(parse_number(origin, e));
      else if (e.key == "confirm_runs") cal.confirm_runs = static_cast<std::size_t>(parse_number(origin, e));
      else if (e.key == "max_evaluations") cal.max_evaluations = static_cast<std::size_t>(parse_number(origin, e));
      else if (e.key == "diameter_tol") cal.diameter_tol = parse_number(origin, e);
      else if (e.key == "init") cal.init = parse_number_list(origin, e);
      else if (e.key == "lower") cal.lower = parse_number_list(origin, e);
      else if (e.key == "upper") cal.upper = parse_number_list(origin, e);
      else fail(origin, e.line, "unknown key '" + e.key + "' in [calibration]");
    }
    if (cal.init.size() != 4)
      fail(origin, calibration_sec->line, "[calibration] init must have 4 entries");
    cfg.calibration = std::move(cal);
  }

  // Portfolio invariants; collect consistency warnings for the caller.
  try {
    cfg.warnings = cfg.portfolio.validate();
  } catch (const std::invalid_argument& err) {
    throw config_error(origin + ": " + err.what());
  }
  if (!(cfg.engine.dt > 0.0) || cfg.engine.dt > cfg.portfolio.horizon)
    throw config_error(origin + ": engine dt must lie in (0, horizon]");
  if (cfg.engine.grid < 2) throw config_error(origin + ": engine grid must be >= 2");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str(), path);
}

}  // namespace fptmc
