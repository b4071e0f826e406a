#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spt;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory, removed on destruction.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("spt_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return (dir / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const char* kMarketKeys =
    "drift = 0.05, 0, -0.03\n"
    "diffusion = 0.3 0 0; 0.1 0.25 0; -0.05 0.1 0.35\n"
    "initial = 1, 2, 1.5\n";

BacktestConfig config_of(const std::string& text) {
  return BacktestConfig::from_keys(KeyValues::parse(text, "<test>"));
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" SPT_CLI_PATH "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("price csv: a two-row file and its grid") {
  const SampledPath s = parse_price_csv("date,A,B\n2021-03-01,1,2\n2021-03-03,2,1\n");
  CHECK(s.dim() == 2);
  CHECK(s.grid().size() == 2);
  CHECK(s.grid()[1] == 2.0);
  CHECK(s.grid().unit() == "days");
  CHECK(s(1, 0) == 2.0);
  CHECK(s.names() == std::vector<std::string>{"A", "B"});

  const SampledPath t = parse_price_csv("t,X\n0.5,3\n");
  CHECK(t.grid().size() == 1);
  CHECK(t.grid().unit().empty());
}

TEST_CASE("price csv: bad cells are hard errors naming row and column") {
  const std::string zero = error_of([] { parse_price_csv("date,A,B\n2021-03-01,1,2\n2021-03-02,0,1\n"); });
  CHECK(zero.find("row 3") != std::string::npos);
  CHECK(zero.find("column 'A'") != std::string::npos);
  CHECK_THROWS_AS(parse_price_csv("date,A,B\n2021-03-01,1,2\n2021-03-02,1,0\n"), DomainError);

  const std::string junk = error_of([] { parse_price_csv("t,A,B\n0,1,2\n1,1,x2\n"); });
  CHECK(junk.find("row 3") != std::string::npos);
  CHECK(junk.find("column 'B'") != std::string::npos);
  CHECK_THROWS_AS(parse_price_csv("t,A\n0,1\n1,1,5\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("t,A\n0,1\n1,\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("t,A\n0,1,5\n0,1\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("date,A\n2021-03-01,1\n2021-03-01,2\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("date,A\n2021-03-02,1\n2021-03-01,2\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("date,A\n2021-02-30,1\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("t,A\n0,\"1,5\"\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv("time,A\n0,1\n"), IoError);
  CHECK_THROWS_AS(parse_price_csv(""), IoError);
  CHECK_THROWS_AS(ingest_csv("/nonexistent/prices.csv"), IoError);
}

TEST_CASE("numbers round-trip through 17 significant digits") {
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.1) == "0.10000000000000001");
  double v = 0.0;
  CHECK_FALSE(parse_double("0,7", v));
  CHECK_FALSE(parse_double("1.5x", v));
  CHECK(parse_double("-2.5e-3", v));
  CHECK(v == -2.5e-3);

  SyntheticSpec spec = standard_test_market(64, 5);
  const SampledPath s = simulate_paths(spec);
  const SampledPath back = parse_price_csv(price_csv(s));
  CHECK(back.values() == s.values());
  CHECK(back.grid().times() == s.grid().times());
}

TEST_CASE("key = value files") {
  const KeyValues kv = KeyValues::parse(
      "# comment\n a = 1.5 \nv = 1, 2 3\nm = 1 0; 0 2\ncomma = 0,7\n\nn = 12 # trailing\n", "<kv>");
  CHECK(kv.number("a") == 1.5);
  CHECK(kv.integer("n") == 12);
  CHECK(kv.vector("v").size() == 3);
  CHECK(kv.matrix("m")(1, 1) == 2.0);
  CHECK(kv.number_or("missing", 4.0) == 4.0);
  // A decimal comma is two numbers, not one.
  CHECK_THROWS_AS(kv.number("comma"), ConfigError);
  CHECK_THROWS_AS(kv.get("missing"), ConfigError);
  CHECK_THROWS_AS(kv.integer("a"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("a = 1\na = 2\n", "<kv>"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("just text\n", "<kv>"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("m = 1 2; 3\n", "<kv>").matrix("m"), ConfigError);
}

TEST_CASE("simulation is seeded and deterministic") {
  const SampledPath a = simulate_paths(standard_test_market(256, 9));
  const SampledPath b = simulate_paths(standard_test_market(256, 9));
  const SampledPath c = simulate_paths(standard_test_market(256, 10));
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.col(0) == standard_test_market().initial);

  NormalStream n1(3), n2(3);
  for (int i = 0; i < 100; ++i) CHECK(n1.next() == n2.next());

  SyntheticSpec bad = standard_test_market(8, 1);
  bad.initial[1] = 0.0;
  CHECK_THROWS(simulate_paths(bad));
}

TEST_CASE("simulation: zero diffusion, unit calibration, identical increments") {
  SyntheticSpec flat;
  flat.assets = 2;
  flat.steps = 1024;
  flat.drift = Vector::Constant(2, 0.3);
  flat.diffusion = Matrix::Zero(2, 2);
  flat.initial = Vector::Ones(2);
  const SampledPath s = simulate_paths(flat);
  const PartitionHierarchy h = build_dyadic_hierarchy(s.grid(), 10);
  const SampledPath logs = log_path(s);
  // A pure drift is of bounded variation: its level sums are drift^2 2^-level, vanishing in the limit.
  for (const Index level : {0, 5, 10})
    CHECK(covariation(logs, 0, logs, 0, h, level).final_value() ==
          doctest::Approx(0.09 / static_cast<double>(Index{1} << level)).epsilon(1e-10));
  CHECK(std::log(s(0, 1024)) == doctest::Approx(0.3).epsilon(1e-12));
  flat.drift.setZero();
  const SampledPath still = log_path(simulate_paths(flat));
  for (const Index level : {0, 5, 10})
    CHECK(covariation(still, 0, still, 1, h, level).values().cwiseAbs().maxCoeff() == 0.0);

  SyntheticSpec unit;
  unit.drift = Vector::Zero(1);
  unit.diffusion = Matrix::Identity(1, 1);
  unit.initial = Vector::Ones(1);
  const SampledPath u = simulate_paths(unit);
  const PartitionHierarchy hu = build_dyadic_hierarchy(u.grid(), 16);
  const SampledPath lu = log_path(u);
  const double ratio = covariation(lu, 0, lu, 0, hu, 16).final_value() / u.grid().horizon();
  CHECK(ratio >= 0.95);
  CHECK(ratio <= 1.05);

  SyntheticSpec twin;
  twin.assets = 2;
  twin.steps = 512;
  twin.drift = Vector::Zero(2);
  twin.diffusion = Matrix::Zero(2, 2);
  twin.diffusion.col(0).setOnes();
  twin.initial = Vector::Ones(2);
  const SampledPath tw = log_path(simulate_paths(twin));
  const PartitionHierarchy ht = build_dyadic_hierarchy(tw.grid(), 9);
  CHECK(covariation(tw, 0, tw, 1, ht, 9).values() == covariation(tw, 0, tw, 0, ht, 9).values());
}

TEST_CASE("synthetic spec keys and their defaults") {
  const SyntheticSpec s = SyntheticSpec::from_keys(KeyValues::parse("drift = 0.1, 0.2\nsteps = 16\n", "<spec>"));
  CHECK(s.assets == 2);
  CHECK(s.steps == 16);
  CHECK(s.diffusion == Matrix::Identity(2, 2));
  CHECK(s.initial == Vector::Ones(2));
  CHECK(s.seed == 42);
  CHECK(s.horizon == 1.0);
}

TEST_CASE("config parsing: required keys, defaults, unknown keys, overrides") {
  const BacktestConfig c = config_of("source = synthetic\nfamily = entropy\nsteps = 64\n");
  CHECK(c.generator.lambda == 0.9);
  CHECK(c.generator.theta == 32.0);
  CHECK(c.theta_unit == ThetaUnit::Steps);
  CHECK(c.route == Route::Both);
  CHECK(c.depth == -1);
  CHECK(c.levels.empty());
  CHECK(c.out_dir == "out");
  CHECK(c.threshold == 2e-2);
  CHECK(c.synthetic.steps == 64);

  CHECK_THROWS_AS(config_of("family = entropy\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = entropy\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = entropy\nlambda = 0,7\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = entropy\nlambda = 1.2\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = simplex\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = csv\nfamily = entropy\ncsv = a.csv\nseed = 3\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = entropy\ncsv = a.csv\n"), ConfigError);
  CHECK_THROWS_AS(config_of("source = synthetic\nfamily = entropy\nlevels = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(split_override("lambda"), ConfigError);
  CHECK(split_override(" lambda = 0.5 ") == std::pair<std::string, std::string>{"lambda", "0.5"});

  Scratch tmp("config");
  const std::string path = tmp.write("run.cfg", "source = csv\ncsv = prices.csv\nfamily = diversity\np = 0.3\n");
  const BacktestConfig loaded = load_config(path, {{"lambda", "0.5"}, {"levels", "3, 1, 3"}});
  CHECK(loaded.csv_path == (tmp.dir / "prices.csv").string());
  CHECK(loaded.generator.lambda == 0.5);
  CHECK(loaded.generator.p == 0.3);
  CHECK(loaded.levels == std::vector<Index>{1, 3});
}

TEST_CASE("theta units") {
  const TimeGrid steps = TimeGrid::uniform(256, 2.0);
  CHECK(theta_in_time(32.0, ThetaUnit::Steps, steps) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(theta_in_time(0.3, ThetaUnit::Time, steps) == 0.3);
  CHECK_THROWS_AS(theta_in_time(5.0, ThetaUnit::Days, steps), ConfigError);
  CHECK_THROWS_AS(theta_in_time(0.0, ThetaUnit::Steps, steps), ConfigError);
  const TimeGrid days = TimeGrid::uniform(100, 100.0, "days");
  CHECK(theta_in_time(20.0, ThetaUnit::Days, days) == 20.0);
  CHECK(theta_in_time(2.0, ThetaUnit::Months, days) == doctest::Approx(60.875).epsilon(1e-15));
}

TEST_CASE("backtest of a constant path has zero residuals") {
  const BacktestConfig c = config_of("source = csv\ncsv = unused.csv\nfamily = entropy\nlambda = 0.6\ntheta = 4\n");
  Matrix flat(3, 65);
  flat.row(0).setConstant(1.0);
  flat.row(1).setConstant(2.0);
  flat.row(2).setConstant(3.0);
  const ReportBundle b = run_backtest(c, SampledPath(TimeGrid::uniform(64, 1.0), flat));
  REQUIRE(b.levels.size() == 3);
  for (const LevelReport& l : b.levels) {
    REQUIRE(l.state);
    REQUIRE(l.functional);
    CAPTURE(l.level);
    CHECK(l.state->lhs.cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.functional->lhs.cwiseAbs().maxCoeff() == 0.0);
    // The window average of constant weights is constant only to rounding.
    CHECK(l.state->residual.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(l.functional->residual.cwiseAbs().maxCoeff() <= 1e-13);
  }
  CHECK(exit_code(b) == 0);
}

TEST_CASE("a single stamp gives header-only ledgers and a zero summary") {
  const BacktestConfig c = config_of("source = csv\ncsv = unused.csv\nfamily = entropy\n");
  const ReportBundle b = run_backtest(c, parse_price_csv("t,A,B\n0,1,2\n"));
  const auto files = render_report(b);
  bool saw_ledger = false;
  for (const auto& [name, text] : files) {
    if (name.rfind("ledger_", 0) == 0) {
      saw_ledger = true;
      CHECK(text == "t,lhs,G_term,g_cum,h_cum,residual\n");
    }
  }
  CHECK(saw_ledger);
  const std::string summary = files.back().second;
  CHECK(files.back().first == "summary.txt");
  CHECK(summary.find("level.0.residual_state = 0\n") != std::string::npos);
  CHECK(summary.find("all_hard_pass = true\n") != std::string::npos);
  CHECK(exit_code(b) == 0);
}

TEST_CASE("entropy sweep on the standard market: residual shrinks, routes agree") {
  BacktestConfig c = config_of(std::string("source = synthetic\nfamily = entropy\nlambda = 0.9\n") + kMarketKeys);
  const ReportBundle b = run_backtest(c);
  REQUIRE(b.levels.size() == 3);
  CHECK(b.levels.back().level == 16);
  std::map<std::string, std::string> s(b.summary.begin(), b.summary.end());
  CHECK(s["max_residual_state_decreasing"] == "true");
  CHECK(s["max_residual_functional_decreasing"] == "true");
  CHECK(s["rng"] == kRngName);
  CHECK(s["seed"] == "42");
  CHECK(exit_code(b) == 0);
  for (const auto& d : b.levels.back().diagnostics) {
    CAPTURE(d.name);
    CHECK(d.pass());
  }
}

TEST_CASE("lambda 1 geometric: both routes write the same ledger") {
  BacktestConfig c = config_of(std::string("source = synthetic\nfamily = geometric\nlambda = 1\nsteps = 4096\n") +
                               kMarketKeys);
  const auto files = render_report(run_backtest(c));
  std::map<std::string, std::string> byname(files.begin(), files.end());
  for (const std::string level : {"8", "10", "12"}) {
    CAPTURE(level);
    CHECK(byname.at("ledger_state_L" + level + ".csv") == byname.at("ledger_functional_L" + level + ".csv"));
  }
}

TEST_CASE("report emission: determinism and no partial output") {
  Scratch tmp("emit");
  BacktestConfig c = config_of(std::string("source = synthetic\nfamily = diversity\np = 0.1\nsteps = 1024\n") +
                               kMarketKeys);
  emit_report(run_backtest(c), (tmp.dir / "a").string());
  emit_report(run_backtest(c), (tmp.dir / "b").string());
  Index count = 0;
  for (const auto& e : fs::directory_iterator(tmp.dir / "a")) {
    ++count;
    CAPTURE(e.path().filename().string());
    CHECK(slurp(e.path()) == slurp(tmp.dir / "b" / e.path().filename()));
  }
  CHECK(count == 16);  // 3 levels x 5 files + summary
  CHECK_FALSE(fs::exists(tmp.dir / "a" / ".spt-staging"));

  const std::string blocker = tmp.write("blocker", "not a directory");
  CHECK_THROWS_AS(emit_report(run_backtest(c), blocker + "/out"), IoError);
  CHECK(fs::is_regular_file(blocker));
}

TEST_CASE("command line: subcommands, exit codes and output precedence") {
  Scratch tmp("cli");
  const std::string spec = tmp.write("market.spec", std::string("steps = 1024\nseed = 3\n") + kMarketKeys);
  const std::string prices = (tmp.dir / "prices.csv").string();
  CHECK(run_cli("simulate --spec " + spec + " --out " + prices) == 0);
  const SampledPath s = ingest_csv(prices);
  CHECK(s.values() == simulate_paths(SyntheticSpec::from_keys(KeyValues::load(spec))).values());

  const std::string cfg = tmp.write("run.cfg", "source = csv\ncsv = prices.csv\nfamily = entropy\ntheta = 8\n");
  CHECK(run_cli("run --config " + cfg + " --out " + (tmp.dir / "direct").string()) == 0);
  CHECK(fs::exists(tmp.dir / "direct" / "summary.txt"));
  CHECK(fs::exists(tmp.dir / "direct" / "ledger_state_L10.csv"));

  // --out beats the environment, which beats the config file.
  CHECK(run_cli("run --config " + cfg + " --level 6 --out " + (tmp.dir / "flag").string(),
                "SPT_OUT_DIR=" + (tmp.dir / "env").string()) == 0);
  CHECK(fs::exists(tmp.dir / "flag" / "ledger_state_L6.csv"));
  CHECK_FALSE(fs::exists(tmp.dir / "env"));
  CHECK(run_cli("run --config " + cfg + " --level 6", "SPT_OUT_DIR=" + (tmp.dir / "env").string()) == 0);
  CHECK(fs::exists(tmp.dir / "env" / "summary.txt"));

  CHECK(run_cli("check --config " + cfg) == 0);
  CHECK(run_cli("check --config " + cfg + " --set threshold=1e-30") == 1);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("run --config " + (tmp.dir / "missing.cfg").string()) == 2);
  CHECK(run_cli("check --config " + cfg + " --set colour=red") == 2);
  CHECK(run_cli("check --config " + cfg + " --level 40") == 2);
  CHECK(run_cli("check --config " + cfg + " --set theta_unit=days") == 2);
  CHECK(run_cli("simulate --spec " + tmp.write("bad.spec", "volatility = 2\n") + " --out " + prices) == 2);
  CHECK(run_cli("run --config " + cfg + " --out " + tmp.write("file", "x") + "/sub") == 2);
}
