#include "spt/genport.hpp"

#include <cmath>

namespace spt {

GeneratingFunction GeneratingFunction::analytic(Index d, Index m, Eval value, Grad grad_x,
                                                Hess hess_x, Grad grad_a) {
  if (d < 1 || m < 0) throw ParameterError("generating function dimensions must be positive");
  if (!value || !grad_x || !hess_x || (m > 0 && !grad_a))
    throw ParameterError("analytic generating function is missing a derivative");
  GeneratingFunction g;
  g.d_ = d;
  g.m_ = m;
  g.provenance_ = DerivativeProvenance::Analytic;
  g.value_ = std::move(value);
  g.grad_x_ = std::move(grad_x);
  g.hess_x_ = std::move(hess_x);
  g.grad_a_ = std::move(grad_a);
  return g;
}

GeneratingFunction GeneratingFunction::from_values(Index d, Index m, Eval value) {
  if (d < 1 || m < 0) throw ParameterError("generating function dimensions must be positive");
  if (!value) throw ParameterError("generating function needs a value callback");
  GeneratingFunction g;
  g.d_ = d;
  g.m_ = m;
  g.provenance_ = DerivativeProvenance::FiniteDifference;
  g.value_ = std::move(value);

  const Vector x = Vector::Constant(d, 1.0 / static_cast<double>(d));
  const Vector a = Vector::Zero(m);
  const double f0 = g.value(x, a);
  const Vector central = g.gradient_x(x, a);
  Vector forward(d);
  for (Index i = 0; i < d; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(x[i]));
    Vector xp = x;
    xp[i] += h;
    forward[i] = (g.value_(xp, a) - f0) / h;
  }
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  const double tol = 1e3 * h * (1.0 + central.cwiseAbs().maxCoeff());
  if (!forward.allFinite() || (central - forward).cwiseAbs().maxCoeff() > tol)
    throw GeneratorError("finite-difference gradient failed its consistency probe");
  return g;
}

double GeneratingFunction::value(const Vector& x, const Vector& a) const {
  const double v = value_(x, a);
  if (!std::isfinite(v)) throw GeneratorError("generating function value is not finite");
  return v;
}

Vector GeneratingFunction::fd_gradient(const Vector& z, bool in_x, const Vector& x,
                                       const Vector& a) const {
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(z[i]));
    Vector xp = x, xm = x, ap = a, am = a;
    if (in_x) {
      xp[i] += h;
      xm[i] -= h;
    } else {
      ap[i] += h;
      am[i] -= h;
    }
    out[i] = (value_(xp, ap) - value_(xm, am)) / (2.0 * h);
  }
  return out;
}

Vector GeneratingFunction::gradient_x(const Vector& x, const Vector& a) const {
  Vector g = grad_x_ ? grad_x_(x, a) : fd_gradient(x, true, x, a);
  if (g.size() != d_ || !g.allFinite()) throw GeneratorError("gradient in x is not finite");
  return g;
}

Matrix GeneratingFunction::hessian_x(const Vector& x, const Vector& a) const {
  Matrix h;
  if (hess_x_) {
    h = hess_x_(x, a);
  } else {
    h.resize(d_, d_);
    for (Index i = 0; i < d_; ++i)
      for (Index j = i; j < d_; ++j) {
        const double hi = 1e-5 * (1.0 + std::abs(x[i]));
        const double hj = 1e-5 * (1.0 + std::abs(x[j]));
        auto at = [&](double si, double sj) {
          Vector z = x;
          z[i] += si * hi;
          z[j] += sj * hj;
          return value_(z, a);
        };
        h(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
        h(j, i) = h(i, j);
      }
  }
  if (h.rows() != d_ || h.cols() != d_ || !h.allFinite())
    throw GeneratorError("hessian in x is not finite");
  return h;
}

Vector GeneratingFunction::gradient_a(const Vector& x, const Vector& a) const {
  if (m_ == 0) return Vector::Zero(0);
  Vector g = grad_a_ ? grad_a_(x, a) : fd_gradient(a, false, x, a);
  if (g.size() != m_ || !g.allFinite()) throw GeneratorError("gradient in a is not finite");
  return g;
}

Vector weights_from_log_gradient(const Vector& mu, const Vector& g) {
  const double mg = mu.dot(g);
  return (mu.array() * (1.0 + g.array() - mg)).matrix();
}

namespace {

double positive_value(const GeneratingFunction& g, const Vector& x, const Vector& a, Index k) {
  const double v = g.value(x, a);
  if (!(v > 0)) throw DomainError("generating function is not positive at stamp " + std::to_string(k));
  return v;
}

void check_inputs(const GeneratingFunction& g, const WeightSeries& mu, const BVPath& a) {
  require_same_grid(mu.grid(), a.grid(), "generating function");
  if (g.dim() != mu.dim()) throw ParameterError("generating function dimension differs from d");
  if (g.bv_dim() != a.dim()) throw ParameterError("generating function BV dimension differs");
}

}  // namespace

WeightSeries generated_weights(const GeneratingFunction& g, const WeightSeries& mu,
                               const BVPath& a) {
  check_inputs(g, mu, a);
  Matrix pi(mu.dim(), mu.grid().size());
  for (Index k = 0; k < pi.cols(); ++k) {
    const Vector x = mu.col(k);
    const Vector ak = a.col(k);
    const double v = positive_value(g, x, ak, k);
    pi.col(k) = weights_from_log_gradient(x, g.gradient_x(x, ak) / v);
  }
  if (!pi.allFinite()) throw GeneratorError("generated weights are not finite");
  return WeightSeries(mu.grid(), std::move(pi), WeightScheme::Generated);
}

Matrix DriftLedger::columns() const {
  Matrix out(5, lhs.size());
  out.row(0) = lhs.transpose();
  out.row(1) = g_term.transpose();
  out.row(2) = g_cum.transpose();
  out.row(3) = h_cum.transpose();
  out.row(4) = residual.transpose();
  return out;
}

DriftLedger assemble_ledger(const GeneratingFunction& g, const SampledPath& prices,
                            const WeightSeries& mu, const MatrixSeries& mu_cov, const BVPath& a,
                            const PartitionHierarchy& hier, Index level, HorizontalRule rule) {
  check_inputs(g, mu, a);
  require_same_grid(prices.grid(), mu.grid(), "master decomposition");
  const IndexList& pts = hier.points(level);
  const Index n_pts = static_cast<Index>(pts.size());

  DriftLedger out;
  out.grid = prices.grid();
  out.level = level;
  out.points = pts;
  out.weights = generated_weights(g, mu, a);

  // Both wealths come from the same level sums, so pi = mu gives lhs = 0 exactly.
  const IntegralSeries log_v = log_portfolio_value(out.weights, prices, hier, level);
  const IntegralSeries log_vm = log_portfolio_value(mu, prices, hier, level);
  out.level_weights.resize(mu.dim(), n_pts);
  for (Index j = 0; j < n_pts; ++j) out.level_weights.col(j) = out.weights.col(pts[static_cast<std::size_t>(j)]);
  out.lhs.resize(n_pts);
  out.g_term.resize(n_pts);
  const double log_g0 = std::log(positive_value(g, mu.col(0), a.col(0), 0));
  for (Index j = 0; j < n_pts; ++j) {
    const Index s = pts[static_cast<std::size_t>(j)];
    out.lhs[j] = log_v.values()(0, j) - log_vm.values()(0, j);
    out.g_term[j] = std::log(positive_value(g, mu.col(s), a.col(s), s)) - log_g0;
  }

  const IntegralSeries hess_part = matrix_stieltjes(
      [&](Index s) -> Matrix {
        const Vector x = mu.col(s);
        const Vector as = a.col(s);
        return g.hessian_x(x, as) / positive_value(g, x, as, s);
      },
      mu_cov);
  out.g_cum = -0.5 * hess_part.values().row(0).transpose();

  // h is accumulated on the finest grid and read at the level points.
  out.h_cum = Vector::Zero(n_pts);
  if (a.dim() > 0) {
    double h = 0.0;
    std::size_t j = 1;
    for (Index k = 0; k < prices.grid().steps(); ++k) {
      const Vector x = mu.col(k);
      const Vector ak = a.col(k);
      const Vector next = a.col(k + 1);
      const double here = positive_value(g, x, ak, k);
      if (rule == HorizontalRule::FrozenIncrement)
        h -= std::log(positive_value(g, x, next, k + 1)) - std::log(here);
      else
        h -= (g.gradient_a(x, ak) / here).dot(next - ak);
      while (j < pts.size() && pts[j] == k + 1) out.h_cum[static_cast<Index>(j++)] = h;
    }
  }
  out.residual = out.lhs - out.g_term - out.g_cum - out.h_cum;
  return out;
}

DriftLedger master_decomposition(const GeneratingFunction& g, const SampledPath& prices,
                                 const BVPath& a, const PartitionHierarchy& hier, Index level,
                                 HorizontalRule rule) {
  const WeightSeries mu = market_weights(prices);
  const CovariationSeries mu_cov = covariation_matrix(mu.as_path(), hier, level);
  return assemble_ledger(g, prices, mu, mu_cov, a, hier, level, rule);
}

}  // namespace spt
