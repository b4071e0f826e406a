#pragma once

// Backtest orchestration: configuration, the per-level state and functional
// ledgers with their diagnostics, and report emission.

#include "spt/mixed_generators.hpp"
#include "spt/synthetic.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spt {

enum class Route { State, Functional, Both };
enum class ThetaUnit { Steps, Time, Days, Months };

const char* to_string(Route route);
const char* to_string(ThetaUnit unit);

/// Keys and defaults:
///   source      synthetic | csv                 (required)
///   csv         price file, relative to the config file
///   spec        synthetic spec file; inline assets, steps, horizon, drift,
///               diffusion, initial, seed override its entries
///   family      geometric | diversity | entropy (required)
///   lambda 0.9, theta 32, theta_unit steps (steps | time | days | months), p 0.5
///   route both (state | functional | both)
///   depth floor(log2 N), levels {L-4, L-2, L} with L the finest level
///   out "out", threshold 2e-2
/// Unknown keys are ConfigErrors.
struct BacktestConfig {
  enum class Source { Synthetic, Csv };

  Source source = Source::Synthetic;
  std::string csv_path;
  SyntheticSpec synthetic;
  MixedGeneratorSpec generator;
  ThetaUnit theta_unit = ThetaUnit::Steps;
  Route route = Route::Both;
  /// -1 selects floor(log2 N).
  int depth = -1;
  /// Empty selects the default sweep.
  std::vector<Index> levels;
  std::string out_dir = "out";
  double threshold = 2e-2;

  static BacktestConfig from_keys(const KeyValues& kv);
};

/// Loads `path` and applies `key=value` overrides before validation.
BacktestConfig load_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Splits "key=value"; ConfigError without '='.
std::pair<std::string, std::string> split_override(const std::string& text);

/// Window length in grid time units; days and months need a grid in days.
double theta_in_time(double theta, ThetaUnit unit, const TimeGrid& grid);

struct Diagnostic {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool hard = false;
  bool pass() const { return value <= threshold; }
};

struct LevelReport {
  Index level = 0;
  std::optional<DriftLedger> state;
  std::optional<DriftLedger> functional;
  std::vector<Diagnostic> diagnostics;
};

struct ReportBundle {
  BacktestConfig config;
  SampledPath prices;
  /// Theta in grid time units.
  double theta_time = 0.0;
  int depth = 0;
  std::vector<LevelReport> levels;
  /// Ordered `key = value` lines.
  std::vector<std::pair<std::string, std::string>> summary;

  bool all_hard_pass() const;
};

/// Loads or simulates the prices and runs every configured route and level.
ReportBundle run_backtest(const BacktestConfig& config);
ReportBundle run_backtest(const BacktestConfig& config, const SampledPath& prices);

/// Writes the bundle into `dir` through a staging directory; on failure no
/// output file is left behind. Ledger files hold every stamp with the value in
/// force at that stamp.
void emit_report(const ReportBundle& bundle, const std::string& dir);

/// File name -> contents, in emission order.
std::vector<std::pair<std::string, std::string>> render_report(const ReportBundle& bundle);

/// 0 when every hard diagnostic passes, else 1.
int exit_code(const ReportBundle& bundle);

/// True when each value is below the previous one, scaled by (1 + slack).
bool decreasing_with_slack(const std::vector<double>& values, double slack);

}  // namespace spt
