#pragma once

// Non-anticipative functionals of stopped paths, their vertical and horizontal
// derivatives, the functional Ito integral along stepwise approximations, and
// the path-dependent master decomposition.

#include "spt/genport.hpp"

#include <memory>

namespace spt {

/// Index-window view of a sampled path stopped at `stop`. Stamps after the
/// stop read the stop value. The stepwise variant reads X(succ(k)) for k < stop,
/// with succ the level successor map: the approximating path takes the
/// forward value X(s') on [s, s'), and its left limit at the stop is X(stop).
/// A bump vector is added at stamps >= stop.
/// Views never own data; the base must outlive them.
class StoppedPathView {
 public:
  StoppedPathView() = default;
  StoppedPathView(const TimeGrid& grid, const Matrix& values, Index stop);
  static StoppedPathView of(const SampledPath& path, Index stop);
  static StoppedPathView of(const BVPath& path, Index stop);
  /// Zero-dimensional view; stands in for an absent BV argument.
  static StoppedPathView none(const TimeGrid& grid, Index stop);

  StoppedPathView stepwise(const IndexList& successor) const;
  StoppedPathView bumped(const Vector& bump) const;
  /// Same path and variant, stopped elsewhere; drops any bump.
  StoppedPathView restopped(Index stop) const;

  const TimeGrid& grid() const { return *grid_; }
  const Matrix* base() const { return values_; }
  Index stop() const { return stop_; }
  Index dim() const { return values_ ? values_->rows() : 0; }
  double time() const { return (*grid_)[stop_]; }
  bool is_stepwise() const { return successor_ != nullptr; }
  const IndexList* successor() const { return successor_; }
  const Vector& bump() const { return bump_; }

  /// Value of the viewed path at grid stamp k.
  Vector col(Index k) const;
  Vector current() const { return col(stop_); }

 private:
  const TimeGrid* grid_ = nullptr;
  const Matrix* values_ = nullptr;
  Index stop_ = 0;
  const IndexList* successor_ = nullptr;
  Vector bump_;
};

/// X^{n,s-} along `level`; PartitionError unless s is a level point.
StoppedPathView stepwise_approximation(const SampledPath& x, const PartitionHierarchy& hier,
                                       Index level, Index s);

struct FunctionalProvenance {
  DerivativeProvenance vertical = DerivativeProvenance::FiniteDifference;
  DerivativeProvenance vertical2 = DerivativeProvenance::FiniteDifference;
  DerivativeProvenance horizontal = DerivativeProvenance::FiniteDifference;
};

/// F(t, X, A) reading X and A only through their views stopped at t.
/// The default derivatives are bump probes; built-ins override them.
class NonAnticipativeFunctional {
 public:
  virtual ~NonAnticipativeFunctional() = default;

  virtual Index dim() const = 0;
  virtual Index bv_dim() const { return 0; }
  virtual double value(double t, const StoppedPathView& x, const StoppedPathView& a) const = 0;

  /// Central bump of the current value, step 1e-5 (1 + |x_i|).
  virtual Vector vertical(double t, const StoppedPathView& x, const StoppedPathView& a) const;
  virtual Matrix vertical2(double t, const StoppedPathView& x, const StoppedPathView& a) const;
  /// [D_0 F, D_1 F, ..., D_m F]; D_0 against A_0(t) = t.
  virtual Vector horizontal(double t, const StoppedPathView& x, const StoppedPathView& a) const;
  virtual FunctionalProvenance provenance() const { return {}; }

  // Bump probes, kept callable for cross-validation of analytic overrides.
  Vector vertical_bump(double t, const StoppedPathView& x, const StoppedPathView& a,
                       double scale = 1e-5) const;
  Matrix vertical2_bump(double t, const StoppedPathView& x, const StoppedPathView& a,
                        double scale = 1e-5) const;
  /// D_0 by a forward time step of 1e-3 of the local grid step with the path
  /// frozen; D_k, k >= 1, by extending A_k with its next grid increment,
  /// skipped (0) when that increment is below 1e-12.
  Vector horizontal_bump(double t, const StoppedPathView& x, const StoppedPathView& a) const;
};

using FunctionalPtr = std::shared_ptr<const NonAnticipativeFunctional>;

/// F(t, X, A) = f(t, X(t), A(t)) with analytic derivatives.
class StateFunctional : public NonAnticipativeFunctional {
 public:
  using Value = std::function<double(double, const Vector&, const Vector&)>;
  using Grad = std::function<Vector(double, const Vector&, const Vector&)>;
  using Hess = std::function<Matrix(double, const Vector&, const Vector&)>;

  /// `horizontal` returns [df/dt, df/da_1, ..., df/da_m].
  StateFunctional(Index d, Index m, Value value, Grad vertical, Hess vertical2, Grad horizontal);

  Index dim() const override { return d_; }
  Index bv_dim() const override { return m_; }
  double value(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Vector vertical(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Matrix vertical2(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Vector horizontal(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  FunctionalProvenance provenance() const override {
    return {DerivativeProvenance::Analytic, DerivativeProvenance::Analytic,
            DerivativeProvenance::Analytic};
  }

 private:
  Index d_;
  Index m_;
  Value value_;
  Grad vertical_;
  Hess vertical2_;
  Grad horizontal_;
};

/// H(t, X) = log sum_i exp(X_i(t)).
FunctionalPtr log_sum_exp_functional(Index d);
/// X_i(t)^2.
FunctionalPtr coordinate_square_functional(Index d, Index i);
FunctionalPtr constant_functional(Index d, double c);
/// F(t, X) = t.
FunctionalPtr time_functional(Index d);
/// F(t, X, A) = G(X(t), A(t)).
FunctionalPtr lift_generating_function(const GeneratingFunction& g);

/// Gamma + H with Gamma(t, X, A) = log G(t, mu(X), A), mu the softmax path of X.
/// Bound to one log-price path; views over any other base throw ParameterError.
class CompositeLogFunctional : public NonAnticipativeFunctional {
 public:
  CompositeLogFunctional(FunctionalPtr g, const SampledPath& log_prices);

  Index dim() const override { return g_->dim(); }
  Index bv_dim() const override { return g_->bv_dim(); }
  double value(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  /// The generated weights pi.
  Vector vertical(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  /// Closed form for Gamma's second derivatives plus diag(mu) - mu mu^T.
  Matrix vertical2(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Vector horizontal(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  FunctionalProvenance provenance() const override;

 private:
  StoppedPathView weight_view(const StoppedPathView& x) const;

  FunctionalPtr g_;
  const Matrix* base_;
  SampledPath weights_;
};

/// sum_{s in level} grad_X F(s, X^{n,s-}, A^s) . (X(s') - X(s)).
IntegralSeries functional_ito_integral(const NonAnticipativeFunctional& f, const SampledPath& x,
                                       const BVPath& a, const PartitionHierarchy& hier,
                                       Index level);

/// All five terms of the functional Ito formula at the level points. The
/// horizontal term sums F(t', X^t, A^{t'}) - F(t, X^t, A^t) over finest steps
/// [t, t'], which integrates the horizontal derivatives exactly per step.
struct ItoFormulaTerms {
  Vector change;      // F(t) - F(0)
  Vector ito;         // functional Ito integral
  Vector horizontal;  // sum_k int D_k F dA_k, A_0(t) = t, as flat-path increments
  Vector second;      // 1/2 sum int d_ij F d[X_i, X_j]
  Vector residual;    // change - ito - horizontal - second
};

/// LeftPoint sums D_0 F dt + sum_i D_i F dA_i with the derivatives at t instead.
ItoFormulaTerms functional_ito_terms(const NonAnticipativeFunctional& f, const SampledPath& x,
                                     const BVPath& a, const PartitionHierarchy& hier, Index level,
                                     HorizontalRule rule = HorizontalRule::FrozenIncrement);
/// max_t |residual(t)|.
double functional_ito_formula_check(const NonAnticipativeFunctional& f, const SampledPath& x,
                                    const BVPath& a, const PartitionHierarchy& hier, Index level,
                                    HorizontalRule rule = HorizontalRule::FrozenIncrement);

/// Softmax weights exp(X_i) / sum_j exp(X_j).
WeightSeries functional_market_weights(const SampledPath& log_prices);

/// pi from G evaluated on views of a weight path, at every stamp.
WeightSeries functional_weights_on_path(const NonAnticipativeFunctional& g,
                                        const SampledPath& weights, const BVPath& a);
/// pi = mu (1 + g - mu . g), g = grad log G(t, mu(., X), A), mu the softmax of X.
WeightSeries functional_generated_weights(const NonAnticipativeFunctional& g,
                                          const SampledPath& log_prices, const BVPath& a);

/// B^pi(t) = sum_k int D_k F dA_k + 1/2 sum int (d_ij F + pi_i pi_j - delta_ij pi_i) d[X_i, X_j],
/// the horizontal part taken as flat-path increments of F.
IntegralSeries bpi_drift(const NonAnticipativeFunctional& f, const SampledPath& log_prices,
                         const BVPath& a, const WeightSeries& pi, const PartitionHierarchy& hier,
                         Index level);

/// Path-dependent master decomposition. V^pi sums pi(s, X^{n,s-})/S(s) . dS
/// over the level and subtracts the covariation term on the path itself;
/// h sums -(log G(t', mu^t, A^{t'}) - log G(t, mu^t, A^t)) over finest steps,
/// or -(D G / G) . (dt, dA) under the LeftPoint rule.
DriftLedger functional_master_decomposition(const NonAnticipativeFunctional& g,
                                            const SampledPath& prices, const BVPath& a,
                                            const PartitionHierarchy& hier, Index level,
                                            HorizontalRule rule = HorizontalRule::FrozenIncrement);

/// Diagnostics tying the composite Gamma + H back to the ledger.
struct CompositeDiagnostics {
  /// max_t |B^pi + h + g|.
  double drift_identity = 0.0;
  /// max_t |log(exp(F(t) - F(0) - B^pi)) - log V^pi|, F = Gamma + H.
  double value_identity = 0.0;
};

CompositeDiagnostics composite_diagnostics(FunctionalPtr g, const SampledPath& prices,
                                           const BVPath& a, const PartitionHierarchy& hier,
                                           Index level);

/// max |[int pi dlog S](T) along level - sum pi^T da pi|, with the integral
/// taken at the finest level and its quadratic variation read along `level`.
double portfolio_qv_check(const NonAnticipativeFunctional& g, const SampledPath& prices,
                          const BVPath& a, const PartitionHierarchy& hier, Index level);

/// max_t | log Vbar^mu(t) - log V^mu(t) | at the level points, where
/// log Vbar^mu = H(t) - H(0) - B^mu on X = log S with H = log sum exp, and
/// log V^mu is the plain Foellmer value of the market weights in S.
double functional_market_check(const SampledPath& prices, const PartitionHierarchy& hier,
                               Index level);

}  // namespace spt
