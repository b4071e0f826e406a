#pragma once

// Generating families phi evaluated at the mixture lambda * mu + (1 - lambda) * alpha
// of the market weights and their moving average, in two forms: a state
// function of (mu(t), alpha(t)) and a functional of the path of mu.

#include "spt/functional.hpp"

#include <string>

namespace spt {

enum class Family { Geometric, Diversity, Entropy };

const char* to_string(Family family);
/// "geometric", "diversity" or "entropy"; ParameterError otherwise.
Family parse_family(const std::string& name);

struct MixedGeneratorSpec {
  Family family = Family::Entropy;
  double lambda = 1.0;
  /// Window length in grid time units.
  double theta = 1.0;
  /// Diversity exponent; ignored by the other families.
  double p = 0.5;

  /// lambda in (0, 1], theta > 0, p in (0, 1) for diversity.
  void validate() const;
};

struct PhiDerivatives {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Closed-form phi, gradient and Hessian; DomainError unless x > 0 (and
/// phi(x) > 0 for entropy).
PhiDerivatives phi_eval_grad_hess(Family family, double p, const Vector& x);
double phi_value(Family family, double p, const Vector& x);

/// lambda * x + (1 - lambda) * a, shared by both forms so lambda = 1 is exact.
Vector mix(double lambda, const Vector& x, const Vector& a);

/// G(x, a) = phi(mix(lambda, x, a)) with m = d.
GeneratingFunction mixed_generating_function(const MixedGeneratorSpec& spec, Index d);

/// G(t, X) = phi(lambda X(t) + (1 - lambda)/theta int_{t-theta}^t X(0 v s) ds).
class MovingAverageMixedFunctional : public NonAnticipativeFunctional {
 public:
  MovingAverageMixedFunctional(MixedGeneratorSpec spec, Index d);

  Index dim() const override { return d_; }
  double value(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Vector vertical(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  Matrix vertical2(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  /// D_0 = (1 - lambda)/theta * phi'(mixture) . (X(t) - X(t - theta)), the
  /// second value read on the step path (X(0) before the start).
  Vector horizontal(double t, const StoppedPathView& x, const StoppedPathView& a) const override;
  FunctionalProvenance provenance() const override {
    return {DerivativeProvenance::Analytic, DerivativeProvenance::Analytic,
            DerivativeProvenance::Analytic};
  }

  const MixedGeneratorSpec& spec() const { return spec_; }
  Vector window(double t, const StoppedPathView& x) const;

 private:
  MixedGeneratorSpec spec_;
  Index d_;
};

/// Weights from the family's closed-form display.
WeightSeries mixed_weights(const MixedGeneratorSpec& spec, const WeightSeries& mu,
                           const BVPath& alpha);

struct DriftTerms {
  IntegralSeries g_cum;
  IntegralSeries h_cum;
};

/// Family closed forms of g (against [mu] at its level) and of h, the latter
/// as int (...) alpha' dt with alpha' the forward difference quotient.
DriftTerms example_drift_terms(const MixedGeneratorSpec& spec, const WeightSeries& mu,
                               const BVPath& alpha, const MatrixSeries& mu_cov);

struct EquivalenceReport {
  /// max over stamps of |pi_state - pi_functional|.
  double weights_deviation = 0.0;
  /// max over level points and ledger columns.
  double ledger_deviation = 0.0;
  DriftLedger state;
  DriftLedger functional;
};

/// Runs the state route (G with A = alpha) and the functional route end to end.
EquivalenceReport equivalence_check(const MixedGeneratorSpec& spec, const SampledPath& prices,
                                    const PartitionHierarchy& hier, Index level);

}  // namespace spt
