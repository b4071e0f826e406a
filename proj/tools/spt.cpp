// Command line front end: run a backtest, simulate prices, or check diagnostics.
//
// Exit codes: 0 all hard diagnostics pass, 1 a hard diagnostic fails,
// 2 usage, configuration, I/O or computation error.

#include "spt/backtest.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>

namespace {

struct RunOptions {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  long long level = -1;
  long long seed = -1;
};

spt::BacktestConfig resolve_config(const RunOptions& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : o.sets) overrides.push_back(spt::split_override(s));
  if (o.level >= 0) overrides.emplace_back("levels", std::to_string(o.level));
  if (o.seed >= 0) overrides.emplace_back("seed", std::to_string(o.seed));
  spt::BacktestConfig c = spt::load_config(o.config, overrides);
  // --out beats SPT_OUT_DIR, which beats the config file.
  if (!o.out.empty()) {
    c.out_dir = o.out;
  } else if (const char* env = std::getenv("SPT_OUT_DIR"); env && *env) {
    c.out_dir = env;
  }
  return c;
}

void print_summary(const spt::ReportBundle& b) {
  for (const auto& [key, value] : b.summary) std::cout << key << " = " << value << '\n';
}

void print_diagnostics(const spt::ReportBundle& b) {
  for (const auto& l : b.levels)
    for (const auto& d : l.diagnostics)
      std::cout << "L" << l.level << ' ' << (d.pass() ? "ok  " : (d.hard ? "FAIL" : "warn")) << ' '
                << d.name << " = " << spt::format_double(d.value) << " (threshold "
                << spt::format_double(d.threshold) << (d.hard ? ", hard" : ", soft") << ")\n";
}

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_out) {
  cmd->add_option("--config", o.config, "flat key = value config file")->required();
  cmd->add_option("--level", o.level, "sweep only this partition level")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "synthetic seed override")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", o.sets, "override any config key, key=value (repeatable)");
  if (with_out) cmd->add_option("--out", o.out, "output directory (overrides SPT_OUT_DIR and config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathwise master-formula backtests for functionally generated portfolios"};
  app.require_subcommand(1);

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "run the configured backtest and write its report");
  add_run_options(run, run_opts, true);

  RunOptions check_opts;
  CLI::App* check = app.add_subcommand("check", "print diagnostics only; writes no files");
  add_run_options(check, check_opts, false);

  std::string spec_path, prices_out;
  long long sim_seed = -1;
  CLI::App* simulate = app.add_subcommand("simulate", "write a synthetic price csv");
  simulate->add_option("--spec", spec_path, "synthetic spec file")->required();
  simulate->add_option("--out", prices_out, "price csv to write")->required();
  simulate->add_option("--seed", sim_seed, "seed override")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const spt::BacktestConfig c = resolve_config(run_opts);
      const spt::ReportBundle b = spt::run_backtest(c);
      spt::emit_report(b, c.out_dir);
      print_summary(b);
      return spt::exit_code(b);
    }
    if (*check) {
      const spt::ReportBundle b = spt::run_backtest(resolve_config(check_opts));
      print_diagnostics(b);
      std::cout << "all_hard_pass = " << (b.all_hard_pass() ? "true" : "false") << '\n';
      return spt::exit_code(b);
    }
    spt::KeyValues kv = spt::KeyValues::load(spec_path);
    for (const auto& [key, value] : kv.entries()) {
      const auto& keys = spt::SyntheticSpec::keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw spt::ConfigError(spec_path + ": unknown synthetic key '" + key + "'");
    }
    if (sim_seed >= 0) kv.set("seed", std::to_string(sim_seed));
    spt::write_price_csv(spt::simulate_paths(spt::SyntheticSpec::from_keys(kv)), prices_out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
