#pragma once

// Generating functions G(x, a) on the simplex x BV-state space, the portfolios
// they generate, and the master decomposition of relative log wealth.

#include "spt/portfolio.hpp"

#include <functional>
#include <string>

namespace spt {

enum class DerivativeProvenance { Analytic, FiniteDifference };

class GeneratingFunction {
 public:
  using Eval = std::function<double(const Vector& x, const Vector& a)>;
  using Grad = std::function<Vector(const Vector& x, const Vector& a)>;
  using Hess = std::function<Matrix(const Vector& x, const Vector& a)>;

  /// Analytic derivatives; grad_a may be empty when m = 0.
  static GeneratingFunction analytic(Index d, Index m, Eval value, Grad grad_x, Hess hess_x,
                                     Grad grad_a);

  /// Central differences with step 1e-5 (1 + |x_i|). The construction probes
  /// at the simplex barycentre (and a = 0) and throws GeneratorError when
  /// central and one-sided gradients disagree beyond O(h).
  static GeneratingFunction from_values(Index d, Index m, Eval value);

  Index dim() const { return d_; }
  Index bv_dim() const { return m_; }
  DerivativeProvenance provenance() const { return provenance_; }

  double value(const Vector& x, const Vector& a) const;
  Vector gradient_x(const Vector& x, const Vector& a) const;
  Matrix hessian_x(const Vector& x, const Vector& a) const;
  Vector gradient_a(const Vector& x, const Vector& a) const;

 private:
  GeneratingFunction() = default;
  Vector fd_gradient(const Vector& z, bool in_x, const Vector& x, const Vector& a) const;

  Index d_ = 0;
  Index m_ = 0;
  DerivativeProvenance provenance_ = DerivativeProvenance::Analytic;
  Eval value_;
  Grad grad_x_;
  Hess hess_x_;
  Grad grad_a_;
};

/// Quadrature of the h column over each finest step [t, t'].
enum class HorizontalRule {
  /// The step's exact integral with the market state frozen at t:
  /// -(log G(mu(t), A(t')) - log G(mu(t), A(t))).
  FrozenIncrement,
  /// -(d_a G / G)(mu(t), A(t)) . (A(t') - A(t)); matches closed-form displays
  /// written with a difference quotient of A.
  LeftPoint,
};

/// pi_i = mu_i (1 + g_i - sum_j mu_j g_j) for a log-gradient g.
Vector weights_from_log_gradient(const Vector& mu, const Vector& g);

/// Weights generated by G along (mu, A); DomainError when G <= 0 and
/// GeneratorError when a derivative is not finite.
WeightSeries generated_weights(const GeneratingFunction& g, const WeightSeries& mu,
                               const BVPath& a);

/// Columns of the master decomposition at the level points, plus the weights
/// it was built from. residual = lhs - G_term - g_cum - h_cum.
struct DriftLedger {
  TimeGrid grid;
  Index level = 0;
  IndexList points;
  Vector lhs;
  Vector g_term;
  Vector g_cum;
  Vector h_cum;
  Vector residual;
  /// Weights at every stamp, read on the path itself.
  WeightSeries weights;
  /// d x points: the weights the first-order sum applies over each level interval.
  Matrix level_weights;

  double final_residual() const { return residual[residual.size() - 1]; }
  double max_abs_residual() const { return residual.cwiseAbs().maxCoeff(); }
  /// lhs, G_term, g_cum, h_cum, residual as a 5 x points matrix.
  Matrix columns() const;
};

/// log(V^pi / V^mu) = log(G(mu(t), A(t)) / G(mu(0), A(0))) + g(t) + h(t), both
/// wealths from the level sums of log_portfolio_value, with
/// g = -1/2 sum int (d_ij G / G) d[mu_i, mu_j] at the level and
/// h = -sum int (d_a G / G) dA on the finest grid. With a moving-average A
/// whose window spans few grid steps, the LeftPoint rule leaves a
/// (1/2) sum d_aa log G (dA)^2 remainder that refining the level cannot remove.
DriftLedger master_decomposition(const GeneratingFunction& g, const SampledPath& prices,
                                 const BVPath& a, const PartitionHierarchy& hier, Index level,
                                 HorizontalRule rule = HorizontalRule::FrozenIncrement);

/// The drift columns assembled from precomputed market data; used by callers
/// that already hold mu, [mu] and the generated weights.
DriftLedger assemble_ledger(const GeneratingFunction& g, const SampledPath& prices,
                            const WeightSeries& mu, const MatrixSeries& mu_cov, const BVPath& a,
                            const PartitionHierarchy& hier, Index level,
                            HorizontalRule rule = HorizontalRule::FrozenIncrement);

}  // namespace spt
