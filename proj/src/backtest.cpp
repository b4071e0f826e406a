#include "spt/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace spt {

namespace fs = std::filesystem;

const char* to_string(Route route) {
  switch (route) {
    case Route::State: return "state";
    case Route::Functional: return "functional";
    case Route::Both: return "both";
  }
  return "?";
}

const char* to_string(ThetaUnit unit) {
  switch (unit) {
    case ThetaUnit::Steps: return "steps";
    case ThetaUnit::Time: return "time";
    case ThetaUnit::Days: return "days";
    case ThetaUnit::Months: return "months";
  }
  return "?";
}

namespace {

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {
      "source", "csv",   "spec",       "assets", "steps", "horizon", "drift",
      "diffusion", "initial", "seed",  "family", "lambda", "theta",  "theta_unit",
      "p",      "route", "depth",      "levels", "out",   "threshold"};
  return keys;
}

std::string resolve(const KeyValues& kv, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(kv.source()).parent_path() / p).string();
}

Route parse_route(const std::string& s) {
  if (s == "state") return Route::State;
  if (s == "functional") return Route::Functional;
  if (s == "both") return Route::Both;
  throw ConfigError("route must be state, functional or both, got '" + s + "'");
}

ThetaUnit parse_theta_unit(const std::string& s) {
  if (s == "steps") return ThetaUnit::Steps;
  if (s == "time") return ThetaUnit::Time;
  if (s == "days") return ThetaUnit::Days;
  if (s == "months") return ThetaUnit::Months;
  throw ConfigError("theta_unit must be steps, time, days or months, got '" + s + "'");
}

bool wants_state(Route r) { return r != Route::Functional; }
bool wants_functional(Route r) { return r != Route::State; }

}  // namespace

BacktestConfig BacktestConfig::from_keys(const KeyValues& kv) {
  for (const auto& [key, value] : kv.entries())
    if (!config_keys().count(key)) throw ConfigError(kv.source() + ": unknown key '" + key + "'");

  BacktestConfig c;
  const std::string& source = kv.get("source");
  bool has_synthetic_keys = kv.has("spec");
  for (const auto& k : SyntheticSpec::keys()) has_synthetic_keys = has_synthetic_keys || kv.has(k);
  if (source == "csv") {
    c.source = Source::Csv;
    c.csv_path = resolve(kv, kv.get("csv"));
    if (has_synthetic_keys)
      throw ConfigError(kv.source() + ": csv source takes no synthetic keys (spec, seed, ...)");
  } else if (source == "synthetic") {
    c.source = Source::Synthetic;
    if (kv.has("csv")) throw ConfigError(kv.source() + ": synthetic source takes no 'csv' key");
    KeyValues merged = kv.has("spec") ? KeyValues::load(resolve(kv, kv.get("spec")))
                                      : KeyValues::parse("", kv.source());
    for (const auto& [key, value] : merged.entries())
      if (std::find(SyntheticSpec::keys().begin(), SyntheticSpec::keys().end(), key) ==
          SyntheticSpec::keys().end())
        throw ConfigError(merged.source() + ": unknown synthetic key '" + key + "'");
    for (const auto& k : SyntheticSpec::keys())
      if (kv.has(k)) merged.set(k, kv.get(k));
    try {
      c.synthetic = SyntheticSpec::from_keys(merged);
    } catch (const ConfigError& e) {
      throw ConfigError(kv.source() + ": " + e.what());
    }
  } else {
    throw ConfigError(kv.source() + ": source must be synthetic or csv, got '" + source + "'");
  }

  try {
    c.generator.family = parse_family(kv.get("family"));
  } catch (const ParameterError& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  c.generator.lambda = kv.number_or("lambda", 0.9);
  c.generator.theta = kv.number_or("theta", 32.0);
  c.generator.p = kv.number_or("p", 0.5);
  if (kv.has("theta_unit")) c.theta_unit = parse_theta_unit(kv.get("theta_unit"));
  if (kv.has("route")) c.route = parse_route(kv.get("route"));
  if (kv.has("depth")) {
    const Index depth = kv.integer("depth");
    if (depth < 0 || depth > 40) throw ConfigError(kv.source() + ": depth must lie in [0, 40]");
    c.depth = static_cast<int>(depth);
  }
  if (kv.has("levels")) {
    const Vector lv = kv.vector("levels");
    if (lv.size() == 0) throw ConfigError(kv.source() + ": levels is empty");
    for (Index i = 0; i < lv.size(); ++i) {
      if (lv[i] < 0 || lv[i] != std::floor(lv[i]))
        throw ConfigError(kv.source() + ": levels must be nonnegative integers");
      c.levels.push_back(static_cast<Index>(lv[i]));
    }
    std::sort(c.levels.begin(), c.levels.end());
    c.levels.erase(std::unique(c.levels.begin(), c.levels.end()), c.levels.end());
  }
  if (kv.has("out")) c.out_dir = kv.get("out");
  c.threshold = kv.number_or("threshold", c.threshold);
  if (!(c.threshold > 0)) throw ConfigError(kv.source() + ": threshold must be positive");

  // theta is checked against the grid later; its sign is known now.
  MixedGeneratorSpec probe = c.generator;
  try {
    probe.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  return c;
}

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + text + "' is not of the form key=value");
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

BacktestConfig load_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  KeyValues kv = KeyValues::load(path);
  for (const auto& [key, value] : overrides) kv.set(key, value);
  return BacktestConfig::from_keys(kv);
}

double theta_in_time(double theta, ThetaUnit unit, const TimeGrid& grid) {
  if (!(theta > 0) || !std::isfinite(theta)) throw ConfigError("theta must be positive");
  switch (unit) {
    case ThetaUnit::Steps:
      return grid.steps() > 0 ? theta * grid.horizon() / static_cast<double>(grid.steps()) : theta;
    case ThetaUnit::Time: return theta;
    case ThetaUnit::Days:
    case ThetaUnit::Months:
      if (grid.unit() != "days")
        throw ConfigError(std::string("theta_unit ") + to_string(unit) +
                          " needs a grid measured in days (a dated csv)");
      return unit == ThetaUnit::Days ? theta : theta * 365.25 / 12.0;
  }
  return theta;
}

bool ReportBundle::all_hard_pass() const {
  for (const auto& l : levels)
    for (const auto& d : l.diagnostics)
      if (d.hard && !d.pass()) return false;
  return true;
}

int exit_code(const ReportBundle& bundle) { return bundle.all_hard_pass() ? 0 : 1; }

bool decreasing_with_slack(const std::vector<double>& values, double slack) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] < (1.0 + slack) * values[i - 1])) return false;
  return true;
}

namespace {

std::string join_levels(const std::vector<Index>& levels) {
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(levels[i]);
  }
  return out;
}

void add_summary_header(ReportBundle& b) {
  const BacktestConfig& c = b.config;
  auto& s = b.summary;
  const bool synthetic = c.source == BacktestConfig::Source::Synthetic;
  s.emplace_back("rng", synthetic ? kRngName : "none");
  s.emplace_back("source", synthetic ? "synthetic" : "csv:" + c.csv_path);
  if (synthetic) s.emplace_back("seed", std::to_string(c.synthetic.seed));
  s.emplace_back("assets", std::to_string(b.prices.dim()));
  s.emplace_back("steps", std::to_string(b.prices.steps()));
  s.emplace_back("horizon", format_double(b.prices.grid().horizon()));
  s.emplace_back("family", to_string(c.generator.family));
  s.emplace_back("lambda", format_double(c.generator.lambda));
  s.emplace_back("theta", format_double(c.generator.theta));
  s.emplace_back("theta_unit", to_string(c.theta_unit));
  s.emplace_back("theta_time", format_double(b.theta_time));
  if (c.generator.family == Family::Diversity) s.emplace_back("p", format_double(c.generator.p));
  s.emplace_back("route", to_string(c.route));
  s.emplace_back("depth", std::to_string(b.depth));
  std::vector<Index> levels;
  for (const auto& l : b.levels) levels.push_back(l.level);
  s.emplace_back("levels", join_levels(levels));
  s.emplace_back("threshold", format_double(c.threshold));
}

void add_summary_table(ReportBundle& b) {
  // Refinement is judged on max_t |residual(t)|; |residual(T)| alone changes
  // sign along the path and need not shrink monotonically.
  std::vector<double> rs, rf;
  for (const auto& l : b.levels) {
    const std::string key = "level." + std::to_string(l.level);
    if (l.state) {
      b.summary.emplace_back(key + ".points", std::to_string(l.state->points.size()));
    } else if (l.functional) {
      b.summary.emplace_back(key + ".points", std::to_string(l.functional->points.size()));
    }
    auto add = [&](const std::optional<DriftLedger>& ledger, const char* route,
                   std::vector<double>& sup) {
      const double last = ledger ? std::abs(ledger->final_residual()) : 0.0;
      const double worst = ledger ? ledger->max_abs_residual() : 0.0;
      sup.push_back(worst);
      b.summary.emplace_back(key + ".residual_" + route, format_double(last));
      b.summary.emplace_back(key + ".max_residual_" + route, format_double(worst));
    };
    if (wants_state(b.config.route)) add(l.state, "state", rs);
    if (wants_functional(b.config.route)) add(l.functional, "functional", rf);
  }
  if (wants_state(b.config.route))
    b.summary.emplace_back("max_residual_state_decreasing",
                           decreasing_with_slack(rs, 0.0) ? "true" : "false");
  if (wants_functional(b.config.route))
    b.summary.emplace_back("max_residual_functional_decreasing",
                           decreasing_with_slack(rf, 0.0) ? "true" : "false");
  b.summary.emplace_back("all_hard_pass", b.all_hard_pass() ? "true" : "false");
}

std::vector<Index> sweep_levels(const BacktestConfig& c, const PartitionHierarchy& hier) {
  const Index finest = hier.finest_level();
  if (!c.levels.empty()) {
    for (const Index l : c.levels)
      if (l > finest)
        throw ConfigError("level " + std::to_string(l) + " is not available (levels 0.." +
                          std::to_string(finest) + ")");
    return c.levels;
  }
  std::vector<Index> out;
  for (const Index back : {4, 2, 0}) out.push_back(std::max<Index>(0, finest - back));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

ReportBundle run_backtest(const BacktestConfig& config) {
  if (config.source == BacktestConfig::Source::Csv) return run_backtest(config, ingest_csv(config.csv_path));
  return run_backtest(config, simulate_paths(config.synthetic));
}

ReportBundle run_backtest(const BacktestConfig& config, const SampledPath& prices) {
  ReportBundle b;
  b.config = config;
  b.prices = prices;
  const TimeGrid& grid = prices.grid();
  const Index d = prices.dim();
  b.theta_time = theta_in_time(config.generator.theta, config.theta_unit, grid);

  if (grid.steps() == 0) {
    // A single stamp has no intervals: every cumulative column is empty.
    if (!config.levels.empty() && config.levels.back() > 0)
      throw ConfigError("a single-stamp grid only has level 0");
    LevelReport l;
    b.levels.push_back(std::move(l));
    add_summary_header(b);
    add_summary_table(b);
    return b;
  }

  MixedGeneratorSpec spec = config.generator;
  spec.theta = b.theta_time;
  try {
    spec.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("generator: ") + e.what());
  }
  b.depth = config.depth >= 0 ? config.depth
                              : static_cast<int>(std::floor(std::log2(static_cast<double>(grid.steps()))));
  const PartitionHierarchy hier = build_dyadic_hierarchy(grid, b.depth);
  const std::vector<Index> levels = sweep_levels(config, hier);

  const WeightSeries mu = market_weights(prices);
  const BVPath alpha = moving_average(mu.as_path(), spec.theta);
  const GeneratingFunction g = mixed_generating_function(spec, d);
  const MovingAverageMixedFunctional ghat(spec, d);
  const BVPath none = BVPath::empty(grid);
  const double s_scale = 1.0 + prices.values().cwiseAbs2().maxCoeff();
  const double hard_exact = 1e-10;

  for (const Index level : levels) {
    LevelReport r;
    r.level = level;
    const bool finest = level == levels.back();
    if (wants_state(config.route)) {
      const CovariationSeries mu_cov = covariation_matrix(mu.as_path(), hier, level);
      r.state = assemble_ledger(g, prices, mu, mu_cov, alpha, hier, level);
    }
    if (wants_functional(config.route))
      r.functional = functional_master_decomposition(ghat, prices, none, hier, level);

    auto& diag = r.diagnostics;
    const CovariationSeries s_cov = covariation_matrix(prices, hier, level);
    diag.push_back({"polarization", s_cov.polarization_deviation() / s_scale, 1e-12, true});
    const double qv = max_log_quadratic_variation(prices, hier, level);
    const double logcov = log_covariation_check(prices, hier, level);
    diag.push_back({"log_covariation", qv > 0 ? logcov / qv : logcov, config.threshold, false});
    const WeightSeries& pi = r.state ? r.state->weights : r.functional->weights;
    diag.push_back({"self_financing", self_financing_check(pi, prices, hier, level),
                    config.threshold, false});
    const CovariationSeries a = covariance_measure(prices, hier, level);
    diag.push_back({"numeraire_invariance", numeraire_invariance_check(pi, mu, a), hard_exact, true});
    diag.push_back({"tau_annihilation", tau_annihilation_check(mu, relative_covariance(mu, a)),
                    hard_exact, true});
    if (r.state && r.functional) {
      diag.push_back({"weights_route_deviation",
                      (r.state->weights.values() - r.functional->weights.values()).cwiseAbs().maxCoeff(),
                      hard_exact, true});
      diag.push_back({"ledger_route_deviation",
                      (r.state->columns() - r.functional->columns()).cwiseAbs().maxCoeff(),
                      config.threshold, false});
    }
    diag.push_back({"market_functional_vs_plain", functional_market_check(prices, hier, level),
                    config.threshold, false});
    if (r.state)
      diag.push_back({"residual_state", std::abs(r.state->final_residual()), config.threshold, finest});
    if (r.functional)
      diag.push_back({"residual_functional", std::abs(r.functional->final_residual()),
                      config.threshold, finest});
    b.levels.push_back(std::move(r));
  }
  add_summary_header(b);
  add_summary_table(b);
  return b;
}

namespace {

const char* kLedgerHeader = "t,lhs,G_term,g_cum,h_cum,residual\n";

std::string ledger_csv(const std::optional<DriftLedger>& ledger, const TimeGrid& grid) {
  std::string out = kLedgerHeader;
  if (!ledger) return out;
  const Matrix cols = ledger->columns();
  std::size_t j = 0;
  for (Index k = 0; k < grid.size(); ++k) {
    while (j + 1 < ledger->points.size() && ledger->points[j + 1] <= k) ++j;
    out += format_double(grid[k]);
    for (Index c = 0; c < cols.rows(); ++c) {
      out += ',';
      out += format_double(cols(c, static_cast<Index>(j)));
    }
    out += '\n';
  }
  return out;
}

std::string weights_csv(const std::optional<DriftLedger>& ledger, const SampledPath& prices) {
  std::string out = "t";
  for (Index i = 0; i < prices.dim(); ++i) {
    out += ',';
    out += prices.names().empty() ? "S" + std::to_string(i + 1)
                                  : prices.names()[static_cast<std::size_t>(i)];
  }
  out += '\n';
  if (!ledger) return out;
  for (std::size_t j = 0; j < ledger->points.size(); ++j) {
    out += format_double(prices.grid()[ledger->points[j]]);
    for (Index i = 0; i < prices.dim(); ++i) {
      out += ',';
      out += format_double(ledger->level_weights(i, static_cast<Index>(j)));
    }
    out += '\n';
  }
  return out;
}

std::string diagnostics_csv(const std::vector<Diagnostic>& diags) {
  std::string out = "name,value,threshold,hard,pass\n";
  for (const auto& d : diags)
    out += d.name + ',' + format_double(d.value) + ',' + format_double(d.threshold) + ',' +
           (d.hard ? "true" : "false") + ',' + (d.pass() ? "true" : "false") + '\n';
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> render_report(const ReportBundle& bundle) {
  std::vector<std::pair<std::string, std::string>> files;
  const TimeGrid& grid = bundle.prices.grid();
  for (const auto& l : bundle.levels) {
    const std::string tag = "_L" + std::to_string(l.level) + ".csv";
    if (wants_state(bundle.config.route)) {
      files.emplace_back("ledger_state" + tag, ledger_csv(l.state, grid));
      files.emplace_back("weights_state" + tag, weights_csv(l.state, bundle.prices));
    }
    if (wants_functional(bundle.config.route)) {
      files.emplace_back("ledger_functional" + tag, ledger_csv(l.functional, grid));
      files.emplace_back("weights_functional" + tag, weights_csv(l.functional, bundle.prices));
    }
    files.emplace_back("diagnostics" + tag, diagnostics_csv(l.diagnostics));
  }
  std::string summary;
  for (const auto& [key, value] : bundle.summary) summary += key + " = " + value + '\n';
  files.emplace_back("summary.txt", std::move(summary));
  return files;
}

void emit_report(const ReportBundle& bundle, const std::string& dir) {
  const auto files = render_report(bundle);
  const fs::path out(dir);
  const fs::path staging = out / ".spt-staging";
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  fs::remove_all(staging, ec);
  fs::create_directory(staging, ec);
  if (ec) throw IoError("cannot create staging directory '" + staging.string() + "': " + ec.message());

  try {
    for (const auto& [name, text] : files) {
      const fs::path p = staging / name;
      std::ofstream f(p, std::ios::binary | std::ios::trunc);
      f << text;
      f.close();
      if (!f) throw IoError("failed writing '" + p.string() + "'");
    }
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  std::vector<fs::path> placed;
  for (const auto& [name, text] : files) {
    fs::rename(staging / name, out / name, ec);
    if (ec) {
      const std::string msg = "cannot move '" + name + "' into '" + dir + "': " + ec.message();
      for (const auto& p : placed) fs::remove(p, ec);
      fs::remove_all(staging, ec);
      throw IoError(msg);
    }
    placed.push_back(out / name);
  }
  fs::remove_all(staging, ec);
}

}  // namespace spt
