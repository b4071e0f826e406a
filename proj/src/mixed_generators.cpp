#include "spt/mixed_generators.hpp"

#include <cmath>

namespace spt {

const char* to_string(Family family) {
  switch (family) {
    case Family::Geometric: return "geometric";
    case Family::Diversity: return "diversity";
    case Family::Entropy: return "entropy";
  }
  return "entropy";
}

Family parse_family(const std::string& name) {
  if (name == "geometric") return Family::Geometric;
  if (name == "diversity") return Family::Diversity;
  if (name == "entropy") return Family::Entropy;
  throw ParameterError("unknown generating family '" + name + "'");
}

void MixedGeneratorSpec::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("theta must be positive");
  if (family == Family::Diversity && !(p > 0.0 && p < 1.0))
    throw ParameterError("diversity exponent p must lie in (0, 1)");
}

namespace {

void require_positive(const Vector& x) {
  if (x.size() < 1) throw DomainError("phi needs at least one coordinate");
  for (Index i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0) || !std::isfinite(x[i]))
      throw DomainError("phi argument must be componentwise positive");
}

/// phi_i / phi, the log-gradient of phi.
Vector log_gradient(Family family, double p, const Vector& x) {
  const double d = static_cast<double>(x.size());
  switch (family) {
    case Family::Geometric: return (1.0 / (d * x.array())).matrix();
    case Family::Diversity: {
      const double s = x.array().pow(p).sum();
      return (x.array().pow(p - 1.0) / s).matrix();
    }
    case Family::Entropy: {
      const double phi = phi_value(family, p, x);
      return (-(1.0 + x.array().log()) / phi).matrix();
    }
  }
  return Vector();
}

}  // namespace

double phi_value(Family family, double p, const Vector& x) {
  require_positive(x);
  const double d = static_cast<double>(x.size());
  double v = 0.0;
  switch (family) {
    case Family::Geometric: v = std::exp(x.array().log().sum() / d); break;
    case Family::Diversity: v = std::pow(x.array().pow(p).sum(), 1.0 / p); break;
    case Family::Entropy: v = -(x.array() * x.array().log()).sum(); break;
  }
  if (!(v > 0.0)) throw DomainError("phi is not positive at this point");
  return v;
}

PhiDerivatives phi_eval_grad_hess(Family family, double p, const Vector& x) {
  PhiDerivatives out;
  out.value = phi_value(family, p, x);
  const Index n = x.size();
  const double d = static_cast<double>(n);
  const double phi = out.value;
  switch (family) {
    case Family::Geometric: {
      const Vector inv = x.cwiseInverse();
      out.gradient = phi / d * inv;
      out.hessian = phi / (d * d) * inv * inv.transpose();
      out.hessian.diagonal() -= (phi / d) * inv.cwiseAbs2();
      break;
    }
    case Family::Diversity: {
      const double s = x.array().pow(p).sum();
      const Vector q = (x.array().pow(p - 1.0) / s).matrix();
      out.gradient = phi * q;
      out.hessian = phi * (1.0 - p) * q * q.transpose();
      out.hessian.diagonal() -= (phi * (1.0 - p) / s) * x.array().pow(p - 2.0).matrix();
      break;
    }
    case Family::Entropy: {
      out.gradient = (-1.0 - x.array().log()).matrix();
      out.hessian = Matrix::Zero(n, n);
      out.hessian.diagonal() = -x.cwiseInverse();
      break;
    }
  }
  return out;
}

Vector mix(double lambda, const Vector& x, const Vector& a) {
  return lambda * x + (1.0 - lambda) * a;
}

GeneratingFunction mixed_generating_function(const MixedGeneratorSpec& spec, Index d) {
  spec.validate();
  const Family f = spec.family;
  const double p = spec.p;
  const double lambda = spec.lambda;
  return GeneratingFunction::analytic(
      d, d, [=](const Vector& x, const Vector& a) { return phi_value(f, p, mix(lambda, x, a)); },
      [=](const Vector& x, const Vector& a) -> Vector {
        return lambda * phi_eval_grad_hess(f, p, mix(lambda, x, a)).gradient;
      },
      [=](const Vector& x, const Vector& a) -> Matrix {
        return (lambda * lambda) * phi_eval_grad_hess(f, p, mix(lambda, x, a)).hessian;
      },
      [=](const Vector& x, const Vector& a) -> Vector {
        return (1.0 - lambda) * phi_eval_grad_hess(f, p, mix(lambda, x, a)).gradient;
      });
}

// --- path-dependent form ------------------------------------------------------------

MovingAverageMixedFunctional::MovingAverageMixedFunctional(MixedGeneratorSpec spec, Index d)
    : spec_(spec), d_(d) {
  spec_.validate();
  if (d < 1) throw ParameterError("dimension must be positive");
}

Vector MovingAverageMixedFunctional::window(double t, const StoppedPathView& x) const {
  return window_average(x.grid(), t, spec_.theta, d_, [&](Index j) { return x.col(j); });
}

double MovingAverageMixedFunctional::value(double t, const StoppedPathView& x,
                                           const StoppedPathView&) const {
  return phi_value(spec_.family, spec_.p, mix(spec_.lambda, x.current(), window(t, x)));
}

Vector MovingAverageMixedFunctional::vertical(double t, const StoppedPathView& x,
                                              const StoppedPathView&) const {
  const Vector m = mix(spec_.lambda, x.current(), window(t, x));
  return spec_.lambda * phi_eval_grad_hess(spec_.family, spec_.p, m).gradient;
}

Matrix MovingAverageMixedFunctional::vertical2(double t, const StoppedPathView& x,
                                               const StoppedPathView&) const {
  const Vector m = mix(spec_.lambda, x.current(), window(t, x));
  return (spec_.lambda * spec_.lambda) * phi_eval_grad_hess(spec_.family, spec_.p, m).hessian;
}

Vector MovingAverageMixedFunctional::horizontal(double t, const StoppedPathView& x,
                                                const StoppedPathView&) const {
  const TimeGrid& grid = x.grid();
  const Vector m = mix(spec_.lambda, x.current(), window(t, x));
  const Vector grad = phi_eval_grad_hess(spec_.family, spec_.p, m).gradient;
  double lo = t - spec_.theta;
  const Vector tail = lo < grid.front() ? x.col(0) : x.col(snap_to_step(grid, lo));
  Vector out(1);
  out[0] = (1.0 - spec_.lambda) / spec_.theta * grad.dot(x.current() - tail);
  return out;
}

// --- closed-form family displays ------------------------------------------------------

WeightSeries mixed_weights(const MixedGeneratorSpec& spec, const WeightSeries& mu,
                           const BVPath& alpha) {
  spec.validate();
  require_same_grid(mu.grid(), alpha.grid(), "mixed weights");
  if (alpha.dim() != mu.dim()) throw ParameterError("moving average dimension differs");
  const double lambda = spec.lambda;
  const double d = static_cast<double>(mu.dim());
  Matrix pi(mu.dim(), mu.grid().size());
  for (Index k = 0; k < pi.cols(); ++k) {
    const Vector m = mu.col(k);
    const Vector mt = mix(lambda, m, alpha.col(k));
    require_positive(mt);
    Vector term;
    switch (spec.family) {
      case Family::Geometric:
        term = (lambda / (d * mt.array())).matrix();
        break;
      case Family::Diversity: {
        const double s = mt.array().pow(spec.p).sum();
        term = (lambda * mt.array().pow(spec.p - 1.0) / s).matrix();
        break;
      }
      case Family::Entropy: {
        const double phi = phi_value(Family::Entropy, spec.p, mt);
        term = (-lambda * mt.array().log() / phi).matrix();
        break;
      }
    }
    pi.col(k) = ((1.0 + term.array() - m.dot(term)) * m.array()).matrix();
  }
  return WeightSeries(mu.grid(), std::move(pi), WeightScheme::Generated);
}

DriftTerms example_drift_terms(const MixedGeneratorSpec& spec, const WeightSeries& mu,
                               const BVPath& alpha, const MatrixSeries& mu_cov) {
  spec.validate();
  require_same_grid(mu.grid(), alpha.grid(), "drift terms");
  require_same_grid(mu.grid(), mu_cov.grid(), "drift terms");
  const double lambda = spec.lambda;
  const double p = spec.p;
  const Index n = mu.dim();
  const double d = static_cast<double>(n);

  // Coefficients W with dg = sum_ij W_ij d[mu_i, mu_j].
  auto g_coeff = [&](Index s) -> Matrix {
    const Vector mt = mix(lambda, mu.col(s), alpha.col(s));
    require_positive(mt);
    Matrix w(n, n);
    switch (spec.family) {
      case Family::Geometric: {
        const Vector inv = mt.cwiseInverse();
        w = -(1.0 / d) * inv * inv.transpose();
        w.diagonal() += inv.cwiseAbs2();
        w *= lambda * lambda / (2.0 * d);
        break;
      }
      case Family::Diversity: {
        const double sp = mt.array().pow(p).sum();
        const Vector q = mt.array().pow(p - 1.0).matrix();
        w = -(1.0 / (sp * sp)) * q * q.transpose();
        w.diagonal() += (mt.array().pow(p - 2.0) / sp).matrix();
        w *= lambda * lambda * (1.0 - p) / 2.0;
        break;
      }
      case Family::Entropy: {
        const double phi = phi_value(Family::Entropy, p, mt);
        w = Matrix::Zero(n, n);
        w.diagonal() = (lambda * lambda / 2.0) * (phi * mt.array()).inverse().matrix();
        break;
      }
    }
    return w;
  };

  DriftTerms out;
  out.g_cum = matrix_stieltjes(g_coeff, mu_cov);

  const TimeGrid& grid = mu.grid();
  const IndexList& pts = mu_cov.points();
  Matrix h = Matrix::Zero(1, mu_cov.point_count());
  double acc = 0.0;
  std::size_t j = 1;
  for (Index k = 0; k < grid.steps(); ++k) {
    const double dt = grid[k + 1] - grid[k];
    const Vector slope = (alpha.col(k + 1) - alpha.col(k)) / dt;
    const Vector mt = mix(lambda, mu.col(k), alpha.col(k));
    acc -= (1.0 - lambda) * log_gradient(spec.family, p, mt).dot(slope) * dt;
    if (j < pts.size() && pts[j] == k + 1) h(0, static_cast<Index>(j++)) = acc;
  }
  out.h_cum = LevelSeries(grid, mu_cov.level(), pts, std::move(h));
  return out;
}

EquivalenceReport equivalence_check(const MixedGeneratorSpec& spec, const SampledPath& prices,
                                    const PartitionHierarchy& hier, Index level) {
  spec.validate();
  const WeightSeries mu = market_weights(prices);
  const BVPath alpha = moving_average(mu.as_path(), spec.theta);
  const GeneratingFunction g = mixed_generating_function(spec, prices.dim());
  const MovingAverageMixedFunctional ghat(spec, prices.dim());

  EquivalenceReport out;
  out.state = master_decomposition(g, prices, alpha, hier, level);
  out.functional =
      functional_master_decomposition(ghat, prices, BVPath::empty(prices.grid()), hier, level);
  out.weights_deviation =
      (out.state.weights.values() - out.functional.weights.values()).cwiseAbs().maxCoeff();
  out.ledger_deviation = (out.state.columns() - out.functional.columns()).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace spt
