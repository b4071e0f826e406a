#include "spt/portfolio.hpp"

#include <cmath>

namespace spt {

const char* to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Market: return "market";
    case WeightScheme::Generated: return "generated";
    case WeightScheme::Functional: return "functional";
    case WeightScheme::Custom: return "custom";
  }
  return "custom";
}

WeightSeries::WeightSeries(TimeGrid grid, Matrix weights, WeightScheme scheme)
    : grid_(std::move(grid)), weights_(std::move(weights)), scheme_(scheme) {
  if (weights_.cols() != grid_.size()) throw GridError("weights are not sampled on their grid");
  if (weights_.rows() < 1) throw ParameterError("weights need at least one asset");
  if (!weights_.allFinite()) throw ParameterError("weights contain non-finite entries");
  for (Index k = 0; k < weights_.cols(); ++k) {
    const double s = weights_.col(k).sum();
    if (std::abs(s - 1.0) > 1e-12)
      throw ParameterError("weights at stamp " + std::to_string(k) + " sum to " +
                           std::to_string(s) + ", not 1");
  }
  long_only_ = (weights_.array() >= 0.0).all();
}

WeightSeries market_weights(const SampledPath& prices) {
  if (!prices.positive()) throw DomainError("market weights need positive prices");
  Matrix mu = prices.values();
  for (Index k = 0; k < mu.cols(); ++k) mu.col(k) /= mu.col(k).sum();
  return WeightSeries(prices.grid(), std::move(mu), WeightScheme::Market);
}

Vector market_value(const SampledPath& prices) {
  const Vector total = prices.values().colwise().sum().transpose();
  return total / total[0];
}

namespace {

void check_weights(const WeightSeries& pi, const SampledPath& prices) {
  require_same_grid(pi.grid(), prices.grid(), "portfolio");
  if (pi.dim() != prices.dim()) throw ParameterError("weights and prices differ in dimension");
  if (!prices.positive()) throw DomainError("portfolio wealth needs positive prices");
}

void check_measure(const WeightSeries& pi, const MatrixSeries& a) {
  require_same_grid(pi.grid(), a.grid(), "covariance measure");
  if (pi.dim() != a.dim()) throw ParameterError("weights and measure differ in dimension");
}

}  // namespace

IntegralSeries log_portfolio_value(const WeightSeries& pi, const SampledPath& prices,
                                   const PartitionHierarchy& hier, Index level) {
  check_weights(pi, prices);
  const Matrix ratio = (pi.values().array() / prices.values().array()).matrix();
  return log_value_from_ratios(ratio, ratio, prices, hier, level);
}

IntegralSeries log_value_from_ratios(const Matrix& linear, const Matrix& quadratic,
                                     const SampledPath& prices, const PartitionHierarchy& hier,
                                     Index level) {
  if (linear.cols() != prices.grid().size() || quadratic.cols() != prices.grid().size())
    throw GridError("portfolio integrands are not on the price grid");
  const IndexList& pts = hier.points(level);
  const Vector lin = cumulative_riemann_sums(linear, prices.values(), pts);
  const CovariationSeries qs = covariation_matrix(prices, hier, level);
  const IntegralSeries quad = quadratic_stieltjes(quadratic, qs);
  return LevelSeries(prices.grid(), level, pts, lin.transpose() - 0.5 * quad.values());
}

IntegralSeries portfolio_value(const WeightSeries& pi, const SampledPath& prices,
                               const PartitionHierarchy& hier, Index level) {
  const IntegralSeries lv = log_portfolio_value(pi, prices, hier, level);
  return LevelSeries(lv.grid(), level, lv.points(), lv.values().array().exp().matrix());
}

double self_financing_check(const WeightSeries& pi, const SampledPath& prices,
                            const PartitionHierarchy& hier, Index level) {
  const IntegralSeries v = portfolio_value(pi, prices, hier, level);
  const IndexList& pts = v.points();
  double wealth = 1.0;
  double dev = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const Index s = pts[j];
    const Index e = pts[j + 1];
    const double vs = v.values()(0, static_cast<Index>(j));
    const Vector xi = (pi.col(s).array() * vs / prices.col(s).array()).matrix();
    wealth += xi.dot(prices.col(e) - prices.col(s));
    const double ve = v.values()(0, static_cast<Index>(j) + 1);
    dev = std::max(dev, std::abs(wealth - ve) / ve);
  }
  return dev;
}

CovariationSeries covariance_measure(const SampledPath& prices, const PartitionHierarchy& hier,
                                     Index level) {
  return covariation_matrix(log_path(prices), hier, level);
}

MeasureSeries excess_growth(const WeightSeries& pi, const MatrixSeries& a) {
  check_measure(pi, a);
  Matrix out = Matrix::Zero(1, a.point_count());
  for (Index j = 0; j + 1 < a.point_count(); ++j) {
    const Index s = a.points()[static_cast<std::size_t>(j)];
    const Matrix da = a.increment(j);
    const Vector p = pi.col(s);
    out(0, j + 1) = out(0, j) + 0.5 * (p.dot(da.diagonal()) - p.dot(da * p));
  }
  const bool nondecreasing = pi.long_only();
  return MeasureSeries(LevelSeries(a.grid(), a.level(), a.points(), std::move(out)), nondecreasing);
}

MatrixSeries relative_covariance(const WeightSeries& rho, const MatrixSeries& a) {
  check_measure(rho, a);
  const Index d = a.dim();
  Matrix out = Matrix::Zero(d * d, a.point_count());
  for (Index j = 0; j + 1 < a.point_count(); ++j) {
    const Index s = a.points()[static_cast<std::size_t>(j)];
    // Row i of P is (rho - e_i)^T.
    Matrix p = Vector::Ones(d) * rho.col(s).transpose();
    p.diagonal().array() -= 1.0;
    const Matrix dt = p * a.increment(j) * p.transpose();
    out.col(j + 1) = out.col(j) + Eigen::Map<const Vector>(dt.data(), d * d);
  }
  return MatrixSeries(a.grid(), a.level(), a.points(), d, std::move(out));
}

MeasureSeries excess_growth_relative(const WeightSeries& pi, const MatrixSeries& tau_rho) {
  return excess_growth(pi, tau_rho);
}

double numeraire_invariance_check(const WeightSeries& pi, const WeightSeries& rho,
                                  const MatrixSeries& a) {
  const MeasureSeries direct = excess_growth(pi, a);
  const MeasureSeries relative = excess_growth_relative(pi, relative_covariance(rho, a));
  return (direct.values() - relative.values()).cwiseAbs().maxCoeff();
}

double tau_annihilation_check(const WeightSeries& rho, const MatrixSeries& tau_rho) {
  check_measure(rho, tau_rho);
  double dev = 0.0;
  for (Index j = 0; j + 1 < tau_rho.point_count(); ++j) {
    const Index s = tau_rho.points()[static_cast<std::size_t>(j)];
    const Vector r = tau_rho.increment(j) * rho.col(s);
    dev = std::max(dev, r.cwiseAbs().maxCoeff());
  }
  return dev;
}

RelativeLogWealth relative_log_wealth(const WeightSeries& pi, const SampledPath& prices,
                                      const PartitionHierarchy& hier, Index level) {
  const WeightSeries mu = market_weights(prices);
  const IntegralSeries lv = log_portfolio_value(pi, prices, hier, level);
  Matrix direct = lv.values() - log_portfolio_value(mu, prices, hier, level).values();

  const SampledPath mu_path = mu.as_path();
  const Matrix ratio = (pi.values().array() / mu.values().array()).matrix();
  const IntegralSeries linear = follmer_integral(SampledPath(prices.grid(), ratio), mu_path, hier, level);
  const MatrixSeries tau = relative_covariance(mu, covariance_measure(prices, hier, level));
  const IntegralSeries quad = quadratic_stieltjes(pi.values(), tau);

  RelativeLogWealth out;
  out.value = LevelSeries(prices.grid(), level, lv.points(), std::move(direct));
  out.via_relative_covariance =
      LevelSeries(prices.grid(), level, lv.points(), linear.values() - 0.5 * quad.values());
  out.route_deviation =
      (out.value.values() - out.via_relative_covariance.values()).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace spt
