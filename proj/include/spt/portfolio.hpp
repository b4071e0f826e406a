#pragma once

// Portfolio weights, pathwise wealth and the covariance-type measures built
// from the covariation of log prices.

#include "spt/calculus.hpp"

namespace spt {

enum class WeightScheme { Market, Generated, Functional, Custom };

const char* to_string(WeightScheme scheme);

/// d-dimensional weights on the grid; every column sums to 1 within 1e-12.
class WeightSeries {
 public:
  WeightSeries() = default;
  WeightSeries(TimeGrid grid, Matrix weights, WeightScheme scheme);

  const TimeGrid& grid() const { return grid_; }
  const Matrix& values() const { return weights_; }
  Index dim() const { return weights_.rows(); }
  auto col(Index k) const { return weights_.col(k); }
  WeightScheme scheme() const { return scheme_; }
  bool long_only() const { return long_only_; }
  SampledPath as_path() const { return SampledPath(grid_, weights_); }

 private:
  TimeGrid grid_;
  Matrix weights_;
  WeightScheme scheme_ = WeightScheme::Custom;
  bool long_only_ = false;
};

/// mu_i = S_i / sum_j S_j; requires positive prices.
WeightSeries market_weights(const SampledPath& prices);
/// V^mu(t) = sum_i S_i(t) / sum_i S_i(0), the exact market wealth ratio.
Vector market_value(const SampledPath& prices);

/// log V^pi at the level points:
/// sum (pi/S) . dS - 1/2 sum (pi_i pi_j / (S_i S_j)) d[S_i, S_j].
IntegralSeries log_portfolio_value(const WeightSeries& pi, const SampledPath& prices,
                                   const PartitionHierarchy& hier, Index level);
IntegralSeries portfolio_value(const WeightSeries& pi, const SampledPath& prices,
                               const PartitionHierarchy& hier, Index level);

/// log V from explicit integrands pi/S: `linear` feeds the first-order sum and
/// `quadratic` the covariation correction; only columns at level points are read.
IntegralSeries log_value_from_ratios(const Matrix& linear, const Matrix& quadratic,
                                     const SampledPath& prices, const PartitionHierarchy& hier,
                                     Index level);

/// max_t |V(t) - (1 + int xi dS)(t)| / V(t) with xi = pi V / S held over each
/// level interval.
double self_financing_check(const WeightSeries& pi, const SampledPath& prices,
                            const PartitionHierarchy& hier, Index level);

/// a_ij = [log S_i, log S_j].
CovariationSeries covariance_measure(const SampledPath& prices, const PartitionHierarchy& hier,
                                     Index level);

/// gamma*_pi increments 1/2 (sum_i pi_i da_ii - pi^T da pi).
MeasureSeries excess_growth(const WeightSeries& pi, const MatrixSeries& a);

/// tau^rho increments (rho - e_i)^T da (rho - e_j).
MatrixSeries relative_covariance(const WeightSeries& rho, const MatrixSeries& a);

/// Excess growth written against tau^rho instead of a; equal to
/// excess_growth(pi, a) for every rho.
MeasureSeries excess_growth_relative(const WeightSeries& pi, const MatrixSeries& tau_rho);

/// max | gamma*_pi(a) - gamma*_pi(tau^rho) | over level points.
double numeraire_invariance_check(const WeightSeries& pi, const WeightSeries& rho,
                                  const MatrixSeries& a);

/// max over level intervals and i of | sum_j rho_j(s) dtau^rho_ij |.
double tau_annihilation_check(const WeightSeries& rho, const MatrixSeries& tau_rho);

struct RelativeLogWealth {
  /// log V^pi - log V^mu at the level points, both from log_portfolio_value.
  IntegralSeries value;
  /// The same through int (pi/mu) dmu - 1/2 sum pi_i pi_j dtau^mu_ij.
  IntegralSeries via_relative_covariance;
  /// max | value - via_relative_covariance |.
  double route_deviation = 0.0;
};

RelativeLogWealth relative_log_wealth(const WeightSeries& pi, const SampledPath& prices,
                                      const PartitionHierarchy& hier, Index level);

}  // namespace spt
