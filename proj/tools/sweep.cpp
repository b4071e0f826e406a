// Refinement sweeps behind the frozen tolerances of the acceptance suite.
//
// For each seed it prints, level by level, every quantity whose threshold was
// set from a sweep: quadratic-variation calibration, the log-covariation and
// market-value deviations, master-formula residuals of both routes (with the
// left-point horizontal rule alongside for comparison), the functional-vs-plain
// market identity and the functional Ito residual of the entropy functional.

#include "spt/backtest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>

namespace {

using namespace spt;

double max_relative_market_deviation(const SampledPath& prices, const PartitionHierarchy& hier,
                                     Index level) {
  const IntegralSeries v = portfolio_value(market_weights(prices), prices, hier, level);
  const Vector vm = market_value(prices);
  double dev = 0.0;
  for (Index j = 0; j < v.point_count(); ++j) {
    const Index s = v.points()[static_cast<std::size_t>(j)];
    dev = std::max(dev, std::abs(v.values()(0, j) - vm[s]) / vm[s]);
  }
  return dev;
}

void sweep_seed(std::uint64_t seed, Index steps, const std::vector<Index>& levels) {
  std::printf("# seed %llu, N = %ld\n", static_cast<unsigned long long>(seed), static_cast<long>(steps));
  const int depth = static_cast<int>(std::log2(static_cast<double>(steps)));

  SyntheticSpec unit;
  unit.steps = steps;
  unit.drift = Vector::Zero(1);
  unit.diffusion = Matrix::Identity(1, 1);
  unit.initial = Vector::Ones(1);
  unit.seed = seed;
  const SampledPath one = simulate_paths(unit);
  const PartitionHierarchy hier1 = build_dyadic_hierarchy(one.grid(), depth);
  const CovariationSeries q = covariation_matrix(log_path(one), hier1, hier1.finest_level());
  std::printf("qv_ratio [log S](T)/T = %.6f\n", q.final_matrix()(0, 0) / one.grid().horizon());

  const SampledPath prices = simulate_paths(standard_test_market(steps, seed));
  const PartitionHierarchy hier = build_dyadic_hierarchy(prices.grid(), depth);
  const WeightSeries mu = market_weights(prices);

  std::printf("%-6s %-14s %-14s %-14s %-14s\n", "level", "logcov_rel", "market_rel", "f_vs_plain",
              "polarization");
  for (const Index level : levels) {
    const double qv = max_log_quadratic_variation(prices, hier, level);
    std::printf("%-6ld %-14.6e %-14.6e %-14.6e %-14.6e\n", static_cast<long>(level),
                log_covariation_check(prices, hier, level) / qv,
                max_relative_market_deviation(prices, hier, level),
                functional_market_check(prices, hier, level),
                covariation_matrix(prices, hier, level).polarization_deviation() /
                    (1.0 + prices.values().cwiseAbs2().maxCoeff()));
  }

  const double theta = 32.0 * prices.grid().horizon() / static_cast<double>(steps);
  for (const Family family : {Family::Geometric, Family::Diversity, Family::Entropy})
    for (const double lambda : {0.6, 0.9}) {
      const MixedGeneratorSpec spec{family, lambda, theta, 0.1};
      const BVPath alpha = moving_average(mu.as_path(), theta);
      const GeneratingFunction g = mixed_generating_function(spec, prices.dim());
      const MovingAverageMixedFunctional ghat(spec, prices.dim());
      std::printf("%s lambda=%.1f\n", to_string(family), lambda);
      std::printf("  %-6s %-12s %-12s %-12s %-12s %-12s %-12s\n", "level", "state_T", "state_sup",
                  "func_T", "func_sup", "left_T", "left_sup");
      for (const Index level : levels) {
        const DriftLedger s = master_decomposition(g, prices, alpha, hier, level);
        const DriftLedger f =
            functional_master_decomposition(ghat, prices, BVPath::empty(prices.grid()), hier, level);
        const DriftLedger left =
            master_decomposition(g, prices, alpha, hier, level, HorizontalRule::LeftPoint);
        std::printf("  %-6ld %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e\n",
                    static_cast<long>(level), std::abs(s.final_residual()), s.max_abs_residual(),
                    std::abs(f.final_residual()), f.max_abs_residual(),
                    std::abs(left.final_residual()), left.max_abs_residual());
      }
    }

  const MovingAverageMixedFunctional entropy({Family::Entropy, 0.9, theta, 0.5}, prices.dim());
  const SampledPath mu_path = mu.as_path();
  const BVPath none = BVPath::empty(prices.grid());
  std::printf("entropy functional Ito residual (sup over t)\n");
  for (const Index level : levels)
    std::printf("  %-6ld %-12.4e\n", static_cast<long>(level),
                functional_ito_formula_check(entropy, mu_path, none, hier, level));
  const SampledPath logs = log_path(prices);
  std::printf("X_1^2 Ito residual at the finest level = %.4e\n",
              functional_ito_formula_check(*coordinate_square_functional(prices.dim(), 0), logs, none,
                                           hier, hier.finest_level()));
}

void time_csv_parse() {
  const Index rows = 2600, assets = 30;
  std::string text = "date";
  for (Index i = 0; i < assets; ++i) text += ",T" + std::to_string(i + 1);
  text += '\n';
  std::chrono::sys_days day = std::chrono::year{2000} / 1 / 3;
  NormalStream z(7);
  for (Index r = 0; r < rows; ++r, day += std::chrono::days{1}) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    text += buf;
    for (Index i = 0; i < assets; ++i) text += ',' + format_double(100.0 * std::exp(0.1 * z.next()));
    text += '\n';
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SampledPath p = parse_price_csv(text);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("csv parse %ld x %ld: %.4f s\n", static_cast<long>(p.grid().size()),
              static_cast<long>(p.dim()), secs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refinement sweeps for the acceptance tolerances"};
  std::vector<std::uint64_t> seeds{42};
  Index steps = Index{1} << 16;
  std::vector<Index> levels{8, 10, 12, 14, 16};
  app.add_option("--seeds", seeds, "seeds to sweep");
  app.add_option("--steps", steps, "grid steps, a power of two");
  app.add_option("--levels", levels, "partition levels");
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto seed : seeds) sweep_seed(seed, steps, levels);
    time_csv_parse();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
