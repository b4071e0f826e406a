#include "spt/functional.hpp"

#include <cmath>

namespace spt {

// --- StoppedPathView ----------------------------------------------------------

StoppedPathView::StoppedPathView(const TimeGrid& grid, const Matrix& values, Index stop)
    : grid_(&grid), values_(&values), stop_(stop) {
  if (values.cols() != grid.size()) throw GridError("view base is not sampled on its grid");
  if (stop < 0 || stop > grid.steps()) throw PartitionError("stop index outside the grid");
}

StoppedPathView StoppedPathView::of(const SampledPath& path, Index stop) {
  return StoppedPathView(path.grid(), path.values(), stop);
}

StoppedPathView StoppedPathView::of(const BVPath& path, Index stop) {
  if (path.dim() == 0) return none(path.grid(), stop);
  return StoppedPathView(path.grid(), path.values(), stop);
}

StoppedPathView StoppedPathView::none(const TimeGrid& grid, Index stop) {
  if (stop < 0 || stop > grid.steps()) throw PartitionError("stop index outside the grid");
  StoppedPathView v;
  v.grid_ = &grid;
  v.stop_ = stop;
  return v;
}

StoppedPathView StoppedPathView::stepwise(const IndexList& successor) const {
  if (static_cast<Index>(successor.size()) != grid_->size())
    throw PartitionError("successor map does not cover the grid");
  StoppedPathView v = *this;
  v.successor_ = &successor;
  return v;
}

StoppedPathView StoppedPathView::bumped(const Vector& bump) const {
  if (bump.size() != dim()) throw ParameterError("bump dimension differs from the path");
  StoppedPathView v = *this;
  v.bump_ = bump_.size() ? Vector(bump_ + bump) : bump;
  return v;
}

StoppedPathView StoppedPathView::restopped(Index stop) const {
  if (stop < 0 || stop > grid_->steps()) throw PartitionError("stop index outside the grid");
  StoppedPathView v = *this;
  v.stop_ = stop;
  v.bump_.resize(0);
  return v;
}

Vector StoppedPathView::col(Index k) const {
  if (!values_) return Vector(0);
  Index j = std::min(k, stop_);
  if (successor_ && j < stop_) j = std::min((*successor_)[static_cast<std::size_t>(j)], stop_);
  Vector v = values_->col(j);
  if (bump_.size() && k >= stop_) v += bump_;
  return v;
}

StoppedPathView stepwise_approximation(const SampledPath& x, const PartitionHierarchy& hier,
                                       Index level, Index s) {
  if (hier.grid_steps() != x.steps()) throw GridError("hierarchy was built for another grid");
  if (!hier.contains(level, s))
    throw PartitionError("stamp " + std::to_string(s) + " is not a point of level " +
                         std::to_string(level));
  return StoppedPathView::of(x, s).stepwise(hier.successor_map(level));
}

// --- bump probes ----------------------------------------------------------------

Vector NonAnticipativeFunctional::vertical(double t, const StoppedPathView& x,
                                           const StoppedPathView& a) const {
  return vertical_bump(t, x, a);
}

Matrix NonAnticipativeFunctional::vertical2(double t, const StoppedPathView& x,
                                            const StoppedPathView& a) const {
  return vertical2_bump(t, x, a);
}

Vector NonAnticipativeFunctional::horizontal(double t, const StoppedPathView& x,
                                             const StoppedPathView& a) const {
  return horizontal_bump(t, x, a);
}

Vector NonAnticipativeFunctional::vertical_bump(double t, const StoppedPathView& x,
                                                const StoppedPathView& a, double scale) const {
  const Vector cur = x.current();
  Vector out(x.dim());
  for (Index i = 0; i < x.dim(); ++i) {
    const double h = scale * (1.0 + std::abs(cur[i]));
    Vector e = Vector::Zero(x.dim());
    e[i] = h;
    out[i] = (value(t, x.bumped(e), a) - value(t, x.bumped(-e), a)) / (2.0 * h);
  }
  return out;
}

Matrix NonAnticipativeFunctional::vertical2_bump(double t, const StoppedPathView& x,
                                                 const StoppedPathView& a, double scale) const {
  const Vector cur = x.current();
  const Index d = x.dim();
  Matrix out(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      const double hi = scale * (1.0 + std::abs(cur[i]));
      const double hj = scale * (1.0 + std::abs(cur[j]));
      auto at = [&](double si, double sj) {
        Vector e = Vector::Zero(d);
        e[i] += si * hi;
        e[j] += sj * hj;
        return value(t, x.bumped(e), a);
      };
      out(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      out(j, i) = out(i, j);
    }
  return out;
}

Vector NonAnticipativeFunctional::horizontal_bump(double t, const StoppedPathView& x,
                                                  const StoppedPathView& a) const {
  const TimeGrid& grid = x.grid();
  const Index k = x.stop();
  const Index n = grid.steps();
  const double step = k < n ? grid[k + 1] - grid[k] : grid[k] - grid[k - 1];
  const double delta = 1e-3 * step;
  const double f0 = value(t, x, a);
  Vector out = Vector::Zero(a.dim() + 1);
  out[0] = (value(t + delta, x, a) - f0) / delta;
  if (a.dim() > 0 && k < n) {
    for (Index i = 0; i < a.dim(); ++i) {
      const double inc = (*a.base())(i, k + 1) - (*a.base())(i, k);
      if (std::abs(inc) < 1e-12) continue;
      Vector e = Vector::Zero(a.dim());
      e[i] = inc;
      out[i + 1] = (value(t, x, a.bumped(e)) - f0) / inc;
    }
  }
  return out;
}

// --- state functionals ---------------------------------------------------------

StateFunctional::StateFunctional(Index d, Index m, Value value, Grad vertical, Hess vertical2,
                                 Grad horizontal)
    : d_(d), m_(m), value_(std::move(value)), vertical_(std::move(vertical)),
      vertical2_(std::move(vertical2)), horizontal_(std::move(horizontal)) {
  if (d < 1 || m < 0) throw ParameterError("state functional dimensions must be positive");
  if (!value_ || !vertical_ || !vertical2_ || !horizontal_)
    throw ParameterError("state functional is missing a derivative");
}

double StateFunctional::value(double t, const StoppedPathView& x, const StoppedPathView& a) const {
  return value_(t, x.current(), a.current());
}

Vector StateFunctional::vertical(double t, const StoppedPathView& x,
                                 const StoppedPathView& a) const {
  return vertical_(t, x.current(), a.current());
}

Matrix StateFunctional::vertical2(double t, const StoppedPathView& x,
                                  const StoppedPathView& a) const {
  return vertical2_(t, x.current(), a.current());
}

Vector StateFunctional::horizontal(double t, const StoppedPathView& x,
                                   const StoppedPathView& a) const {
  return horizontal_(t, x.current(), a.current());
}

namespace {

Vector softmax(const Vector& x) {
  const double top = x.maxCoeff();
  const Vector e = (x.array() - top).exp().matrix();
  return e / e.sum();
}

Vector no_horizontal(double, const Vector&, const Vector&) { return Vector::Zero(1); }

}  // namespace

FunctionalPtr log_sum_exp_functional(Index d) {
  return std::make_shared<StateFunctional>(
      d, 0,
      [](double, const Vector& x, const Vector&) {
        const double top = x.maxCoeff();
        return top + std::log((x.array() - top).exp().sum());
      },
      [](double, const Vector& x, const Vector&) { return softmax(x); },
      [](double, const Vector& x, const Vector&) -> Matrix {
        const Vector m = softmax(x);
        Matrix h = -m * m.transpose();
        h.diagonal() += m;
        return h;
      },
      no_horizontal);
}

FunctionalPtr coordinate_square_functional(Index d, Index i) {
  if (i < 0 || i >= d) throw ParameterError("coordinate out of range");
  return std::make_shared<StateFunctional>(
      d, 0, [i](double, const Vector& x, const Vector&) { return x[i] * x[i]; },
      [i, d](double, const Vector& x, const Vector&) -> Vector {
        Vector g = Vector::Zero(d);
        g[i] = 2.0 * x[i];
        return g;
      },
      [i, d](double, const Vector&, const Vector&) -> Matrix {
        Matrix h = Matrix::Zero(d, d);
        h(i, i) = 2.0;
        return h;
      },
      no_horizontal);
}

FunctionalPtr constant_functional(Index d, double c) {
  return std::make_shared<StateFunctional>(
      d, 0, [c](double, const Vector&, const Vector&) { return c; },
      [d](double, const Vector&, const Vector&) -> Vector { return Vector::Zero(d); },
      [d](double, const Vector&, const Vector&) -> Matrix { return Matrix::Zero(d, d); },
      no_horizontal);
}

FunctionalPtr time_functional(Index d) {
  return std::make_shared<StateFunctional>(
      d, 0, [](double t, const Vector&, const Vector&) { return t; },
      [d](double, const Vector&, const Vector&) -> Vector { return Vector::Zero(d); },
      [d](double, const Vector&, const Vector&) -> Matrix { return Matrix::Zero(d, d); },
      [](double, const Vector&, const Vector&) -> Vector { return Vector::Ones(1); });
}

FunctionalPtr lift_generating_function(const GeneratingFunction& g) {
  const Index m = g.bv_dim();
  return std::make_shared<StateFunctional>(
      g.dim(), m, [g](double, const Vector& x, const Vector& a) { return g.value(x, a); },
      [g](double, const Vector& x, const Vector& a) { return g.gradient_x(x, a); },
      [g](double, const Vector& x, const Vector& a) { return g.hessian_x(x, a); },
      [g, m](double, const Vector& x, const Vector& a) -> Vector {
        Vector out = Vector::Zero(m + 1);
        out.tail(m) = g.gradient_a(x, a);
        return out;
      });
}

// --- composite Gamma + H ----------------------------------------------------------

CompositeLogFunctional::CompositeLogFunctional(FunctionalPtr g, const SampledPath& log_prices)
    : g_(std::move(g)), base_(&log_prices.values()) {
  if (!g_) throw ParameterError("composite functional needs a generating functional");
  if (g_->dim() != log_prices.dim()) throw ParameterError("composite dimension mismatch");
  weights_ = functional_market_weights(log_prices).as_path();
}

StoppedPathView CompositeLogFunctional::weight_view(const StoppedPathView& x) const {
  if (x.base() != base_)
    throw ParameterError("composite functional is bound to a different log-price path");
  StoppedPathView w = StoppedPathView::of(weights_, x.stop());
  if (x.is_stepwise()) w = w.stepwise(*x.successor());
  if (x.bump().size()) {
    const Vector raw = base_->col(x.stop());
    w = w.bumped(softmax(raw + x.bump()) - softmax(raw));
  }
  return w;
}

double CompositeLogFunctional::value(double t, const StoppedPathView& x,
                                     const StoppedPathView& a) const {
  const double gv = g_->value(t, weight_view(x), a);
  if (!(gv > 0)) throw DomainError("generating functional is not positive");
  const Vector cur = x.current();
  const double top = cur.maxCoeff();
  return std::log(gv) + top + std::log((cur.array() - top).exp().sum());
}

Vector CompositeLogFunctional::vertical(double t, const StoppedPathView& x,
                                        const StoppedPathView& a) const {
  const StoppedPathView w = weight_view(x);
  const double gv = g_->value(t, w, a);
  return weights_from_log_gradient(w.current(), g_->vertical(t, w, a) / gv);
}

Matrix CompositeLogFunctional::vertical2(double t, const StoppedPathView& x,
                                         const StoppedPathView& a) const {
  const StoppedPathView w = weight_view(x);
  const Vector mu = w.current();
  const double gv = g_->value(t, w, a);
  const Matrix hg = g_->vertical2(t, w, a) / gv;
  const Vector pi = weights_from_log_gradient(mu, g_->vertical(t, w, a) / gv);
  const Index d = mu.size();
  // P_ik = mu_i - delta_ik; Gamma'' = P D Hg D P^T - pi pi^T + mu mu^T + diag(pi - mu).
  Matrix p = mu * Vector::Ones(d).transpose();
  p.diagonal().array() -= 1.0;
  const Matrix dm = mu.asDiagonal();
  Matrix out = p * dm * hg * dm * p.transpose() - pi * pi.transpose();
  // Adding H'' = diag(mu) - mu mu^T leaves diag(pi).
  out.diagonal() += pi;
  return out;
}

Vector CompositeLogFunctional::horizontal(double t, const StoppedPathView& x,
                                          const StoppedPathView& a) const {
  const StoppedPathView w = weight_view(x);
  return g_->horizontal(t, w, a) / g_->value(t, w, a);
}

FunctionalProvenance CompositeLogFunctional::provenance() const { return g_->provenance(); }

// --- integrals and ledgers ---------------------------------------------------------

namespace {

void check_functional(const NonAnticipativeFunctional& f, const SampledPath& x, const BVPath& a,
                      const PartitionHierarchy& hier) {
  if (f.dim() != x.dim()) throw ParameterError("functional dimension differs from the path");
  if (f.bv_dim() != a.dim()) throw ParameterError("functional BV dimension differs");
  require_same_grid(x.grid(), a.grid(), "functional");
  if (hier.grid_steps() != x.steps()) throw GridError("hierarchy was built for another grid");
}

/// sum_k [D_0 F dt + sum_i D_i F dA_i] / scale(k) on the finest grid, read at the points.
template <typename Scale>
Vector horizontal_sums(const NonAnticipativeFunctional& f, const SampledPath& x, const BVPath& a,
                       const IndexList& pts, Scale&& scale) {
  const TimeGrid& grid = x.grid();
  Vector out = Vector::Zero(static_cast<Index>(pts.size()));
  double acc = 0.0;
  std::size_t j = 1;
  for (Index k = 0; k < grid.steps(); ++k) {
    const StoppedPathView xv = StoppedPathView::of(x, k);
    const StoppedPathView av = StoppedPathView::of(a, k);
    const Vector hz = f.horizontal(grid[k], xv, av) / scale(k);
    double inc = hz[0] * (grid[k + 1] - grid[k]);
    for (Index i = 0; i < a.dim(); ++i) inc += hz[i + 1] * (a.values()(i, k + 1) - a.values()(i, k));
    acc += inc;
    if (j < pts.size() && pts[j] == k + 1) out[static_cast<Index>(j++)] = acc;
  }
  return out;
}

/// sum over finest steps of F(t_{k+1}, X^{t_k}, A^{t_{k+1}}) - F(t_k, X^{t_k}, A^{t_k}),
/// X held flat over the step, as log differences when `in_log`; read at the points.
/// Per step this equals int D_0 F dt + sum_i int D_i F dA_i without quadrature error.
Vector horizontal_increments(const NonAnticipativeFunctional& f, const SampledPath& x,
                             const BVPath& a, const IndexList& pts, bool in_log) {
  const TimeGrid& grid = x.grid();
  auto read = [&](double v, Index k) {
    if (!in_log) return v;
    if (!(v > 0)) throw DomainError("generating functional is not positive at stamp " + std::to_string(k));
    return std::log(v);
  };
  Vector out = Vector::Zero(static_cast<Index>(pts.size()));
  double acc = 0.0;
  double here = read(f.value(grid[0], StoppedPathView::of(x, 0), StoppedPathView::of(a, 0)), 0);
  std::size_t j = 1;
  for (Index k = 0; k < grid.steps(); ++k) {
    const StoppedPathView xv = StoppedPathView::of(x, k);
    const double flat = read(f.value(grid[k + 1], xv, StoppedPathView::of(a, k + 1)), k);
    const double next =
        read(f.value(grid[k + 1], StoppedPathView::of(x, k + 1), StoppedPathView::of(a, k + 1)), k + 1);
    acc += flat - here;
    here = next;
    if (j < pts.size() && pts[j] == k + 1) out[static_cast<Index>(j++)] = acc;
  }
  return out;
}

}  // namespace

IntegralSeries functional_ito_integral(const NonAnticipativeFunctional& f, const SampledPath& x,
                                       const BVPath& a, const PartitionHierarchy& hier,
                                       Index level) {
  check_functional(f, x, a, hier);
  const IndexList& pts = hier.points(level);
  const IndexList& succ = hier.successor_map(level);
  Matrix out = Matrix::Zero(1, static_cast<Index>(pts.size()));
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const Index s = pts[j];
    const Index e = pts[j + 1];
    const StoppedPathView xv = StoppedPathView::of(x, s).stepwise(succ);
    const Vector grad = f.vertical(x.grid()[s], xv, StoppedPathView::of(a, s));
    const Index c = static_cast<Index>(j);
    out(0, c + 1) = out(0, c) + grad.dot(x.col(e) - x.col(s));
  }
  return LevelSeries(x.grid(), level, pts, std::move(out));
}

ItoFormulaTerms functional_ito_terms(const NonAnticipativeFunctional& f, const SampledPath& x,
                                     const BVPath& a, const PartitionHierarchy& hier, Index level,
                                     HorizontalRule rule) {
  check_functional(f, x, a, hier);
  const IndexList& pts = hier.points(level);
  const Index n_pts = static_cast<Index>(pts.size());
  const TimeGrid& grid = x.grid();
  ItoFormulaTerms out;
  out.change.resize(n_pts);
  const double f0 = f.value(grid[0], StoppedPathView::of(x, 0), StoppedPathView::of(a, 0));
  for (Index j = 0; j < n_pts; ++j) {
    const Index s = pts[static_cast<std::size_t>(j)];
    out.change[j] = f.value(grid[s], StoppedPathView::of(x, s), StoppedPathView::of(a, s)) - f0;
  }
  out.ito = functional_ito_integral(f, x, a, hier, level).values().row(0).transpose();
  out.horizontal = rule == HorizontalRule::FrozenIncrement
                       ? horizontal_increments(f, x, a, pts, false)
                       : horizontal_sums(f, x, a, pts, [](Index) { return 1.0; });
  const CovariationSeries qx = covariation_matrix(x, hier, level);
  const IntegralSeries second = matrix_stieltjes(
      [&](Index s) -> Matrix {
        return 0.5 * f.vertical2(grid[s], StoppedPathView::of(x, s), StoppedPathView::of(a, s));
      },
      qx);
  out.second = second.values().row(0).transpose();
  out.residual = out.change - out.ito - out.horizontal - out.second;
  return out;
}

double functional_ito_formula_check(const NonAnticipativeFunctional& f, const SampledPath& x,
                                    const BVPath& a, const PartitionHierarchy& hier, Index level,
                                    HorizontalRule rule) {
  return functional_ito_terms(f, x, a, hier, level, rule).residual.cwiseAbs().maxCoeff();
}

WeightSeries functional_market_weights(const SampledPath& log_prices) {
  Matrix mu(log_prices.dim(), log_prices.grid().size());
  for (Index k = 0; k < mu.cols(); ++k) mu.col(k) = softmax(log_prices.col(k));
  return WeightSeries(log_prices.grid(), std::move(mu), WeightScheme::Market);
}

namespace {

/// Weights and G values on the actual weight path at every stamp.
struct PathWeights {
  Matrix pi;
  Vector g_value;
};

PathWeights weights_along(const NonAnticipativeFunctional& g, const SampledPath& w,
                          const BVPath& a) {
  if (g.dim() != w.dim()) throw ParameterError("functional dimension differs from the weights");
  if (g.bv_dim() != a.dim()) throw ParameterError("functional BV dimension differs");
  require_same_grid(w.grid(), a.grid(), "functional weights");
  PathWeights out;
  out.pi.resize(w.dim(), w.grid().size());
  out.g_value.resize(w.grid().size());
  for (Index k = 0; k < w.grid().size(); ++k) {
    const StoppedPathView xv = StoppedPathView::of(w, k);
    const StoppedPathView av = StoppedPathView::of(a, k);
    const double v = g.value(w.grid()[k], xv, av);
    if (!(v > 0)) throw DomainError("generating functional is not positive at stamp " + std::to_string(k));
    out.g_value[k] = v;
    out.pi.col(k) = weights_from_log_gradient(w.col(k), g.vertical(w.grid()[k], xv, av) / v);
  }
  if (!out.pi.allFinite()) throw GeneratorError("functional weights are not finite");
  return out;
}

}  // namespace

WeightSeries functional_weights_on_path(const NonAnticipativeFunctional& g,
                                        const SampledPath& weights, const BVPath& a) {
  PathWeights pw = weights_along(g, weights, a);
  return WeightSeries(weights.grid(), std::move(pw.pi), WeightScheme::Functional);
}

WeightSeries functional_generated_weights(const NonAnticipativeFunctional& g,
                                          const SampledPath& log_prices, const BVPath& a) {
  return functional_weights_on_path(g, functional_market_weights(log_prices).as_path(), a);
}

IntegralSeries bpi_drift(const NonAnticipativeFunctional& f, const SampledPath& log_prices,
                         const BVPath& a, const WeightSeries& pi, const PartitionHierarchy& hier,
                         Index level) {
  check_functional(f, log_prices, a, hier);
  require_same_grid(pi.grid(), log_prices.grid(), "bpi drift");
  const IndexList& pts = hier.points(level);
  const TimeGrid& grid = log_prices.grid();
  const Vector horiz = horizontal_increments(f, log_prices, a, pts, false);
  const CovariationSeries q = covariation_matrix(log_prices, hier, level);
  const IntegralSeries quad = matrix_stieltjes(
      [&](Index s) -> Matrix {
        const Vector p = pi.col(s);
        Matrix m = f.vertical2(grid[s], StoppedPathView::of(log_prices, s),
                               StoppedPathView::of(a, s)) +
                   p * p.transpose();
        m.diagonal() -= p;
        return 0.5 * m;
      },
      q);
  return LevelSeries(grid, level, pts, horiz.transpose() + quad.values());
}

DriftLedger functional_master_decomposition(const NonAnticipativeFunctional& g,
                                            const SampledPath& prices, const BVPath& a,
                                            const PartitionHierarchy& hier, Index level,
                                            HorizontalRule rule) {
  const WeightSeries mu = market_weights(prices);
  const SampledPath mu_path = mu.as_path();
  check_functional(g, mu_path, a, hier);
  const TimeGrid& grid = prices.grid();
  const IndexList& pts = hier.points(level);
  const IndexList& succ = hier.successor_map(level);
  const Index n_pts = static_cast<Index>(pts.size());

  PathWeights pw = weights_along(g, mu_path, a);

  // First-order integrand reads the stepwise approximand at each level point.
  Matrix linear = (pw.pi.array() / prices.values().array()).matrix();
  const Matrix quadratic = linear;
  Matrix level_weights(mu.dim(), n_pts);
  level_weights.col(n_pts - 1) = pw.pi.col(pts.back());
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const Index s = pts[j];
    const StoppedPathView xv = StoppedPathView::of(mu_path, s).stepwise(succ);
    const StoppedPathView av = StoppedPathView::of(a, s);
    const double v = g.value(grid[s], xv, av);
    if (!(v > 0)) throw DomainError("generating functional is not positive at stamp " + std::to_string(s));
    const Vector pin = weights_from_log_gradient(mu_path.col(s), g.vertical(grid[s], xv, av) / v);
    linear.col(s) = (pin.array() / prices.col(s).array()).matrix();
    level_weights.col(static_cast<Index>(j)) = pin;
  }

  DriftLedger out;
  out.grid = grid;
  out.level = level;
  out.points = pts;
  out.level_weights = std::move(level_weights);
  const IntegralSeries log_v = log_value_from_ratios(linear, quadratic, prices, hier, level);
  const IntegralSeries log_vm = log_portfolio_value(mu, prices, hier, level);
  out.lhs.resize(n_pts);
  out.g_term.resize(n_pts);
  const double log_g0 = std::log(pw.g_value[0]);
  for (Index j = 0; j < n_pts; ++j) {
    const Index s = pts[static_cast<std::size_t>(j)];
    out.lhs[j] = log_v.values()(0, j) - log_vm.values()(0, j);
    out.g_term[j] = std::log(pw.g_value[s]) - log_g0;
  }

  const CovariationSeries mu_cov = covariation_matrix(mu_path, hier, level);
  const IntegralSeries hess_part = matrix_stieltjes(
      [&](Index s) -> Matrix {
        return g.vertical2(grid[s], StoppedPathView::of(mu_path, s), StoppedPathView::of(a, s)) /
               pw.g_value[s];
      },
      mu_cov);
  out.g_cum = -0.5 * hess_part.values().row(0).transpose();
  out.h_cum = rule == HorizontalRule::FrozenIncrement
                  ? Vector(-horizontal_increments(g, mu_path, a, pts, true))
                  : Vector(-horizontal_sums(g, mu_path, a, pts, [&](Index k) { return pw.g_value[k]; }));
  out.residual = out.lhs - out.g_term - out.g_cum - out.h_cum;
  out.weights = WeightSeries(grid, std::move(pw.pi), WeightScheme::Functional);
  return out;
}

CompositeDiagnostics composite_diagnostics(FunctionalPtr g, const SampledPath& prices,
                                           const BVPath& a, const PartitionHierarchy& hier,
                                           Index level) {
  const SampledPath logs = log_path(prices);
  const CompositeLogFunctional comp(g, logs);
  const WeightSeries pi = functional_generated_weights(*g, logs, a);
  const IntegralSeries b = bpi_drift(comp, logs, a, pi, hier, level);
  const DriftLedger ledger = functional_master_decomposition(*g, prices, a, hier, level);
  const IntegralSeries log_vm = log_portfolio_value(market_weights(prices), prices, hier, level);
  const TimeGrid& grid = prices.grid();

  CompositeDiagnostics out;
  const double f0 = comp.value(grid[0], StoppedPathView::of(logs, 0), StoppedPathView::of(a, 0));
  for (Index j = 0; j < b.point_count(); ++j) {
    const Index s = b.points()[static_cast<std::size_t>(j)];
    const double bj = b.values()(0, j);
    out.drift_identity = std::max(out.drift_identity, std::abs(bj + ledger.h_cum[j] + ledger.g_cum[j]));
    const double fs = comp.value(grid[s], StoppedPathView::of(logs, s), StoppedPathView::of(a, s));
    const double log_vpi = ledger.lhs[j] + log_vm.values()(0, j);
    out.value_identity = std::max(out.value_identity, std::abs(fs - f0 - bj - log_vpi));
  }
  return out;
}

double portfolio_qv_check(const NonAnticipativeFunctional& g, const SampledPath& prices,
                          const BVPath& a, const PartitionHierarchy& hier, Index level) {
  const WeightSeries mu = market_weights(prices);
  const WeightSeries pi = functional_weights_on_path(g, mu.as_path(), a);
  const SampledPath logs = log_path(prices);
  // Integral at the finest resolution, read on every stamp.
  Vector integral = cumulative_riemann_sums(pi.values(), logs.values(),
                                            hier.points(hier.finest_level()));
  const IndexList& pts = hier.points(level);
  double lhs = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const double inc = integral[pts[j + 1]] - integral[pts[j]];
    lhs += inc * inc;
  }
  const CovariationSeries acov = covariation_matrix(logs, hier, level);
  const double rhs = quadratic_stieltjes(pi.values(), acov).final_value();
  return std::abs(lhs - rhs);
}

double functional_market_check(const SampledPath& prices, const PartitionHierarchy& hier,
                               Index level) {
  const SampledPath logs = log_path(prices);
  const FunctionalPtr h = log_sum_exp_functional(prices.dim());
  const BVPath none = BVPath::empty(prices.grid());
  const WeightSeries mu = functional_market_weights(logs);
  const IntegralSeries b = bpi_drift(*h, logs, none, mu, hier, level);
  const IntegralSeries plain = log_portfolio_value(market_weights(prices), prices, hier, level);
  const TimeGrid& grid = prices.grid();
  const double h0 = h->value(grid[0], StoppedPathView::of(logs, 0), StoppedPathView::none(grid, 0));
  double dev = 0.0;
  for (Index j = 0; j < b.point_count(); ++j) {
    const Index s = b.points()[static_cast<std::size_t>(j)];
    const double hs = h->value(grid[s], StoppedPathView::of(logs, s), StoppedPathView::none(grid, s));
    dev = std::max(dev, std::abs(hs - h0 - b.values()(0, j) - plain.values()(0, j)));
  }
  return dev;
}

}  // namespace spt
