#include "spt/calculus.hpp"

#include <cmath>

namespace spt {

LevelSeries::LevelSeries(TimeGrid grid, Index level, IndexList points, Matrix values)
    : grid_(std::move(grid)), level_(level), points_(std::move(points)), values_(std::move(values)) {
  if (static_cast<Index>(points_.size()) != values_.cols())
    throw PartitionError("level series value count does not match its points");
  if (points_.empty() || points_.front() != 0 || points_.back() != grid_.steps())
    throw PartitionError("level series points must span the grid");
}

Vector LevelSeries::at_stamp(Index stamp) const {
  if (stamp < 0 || stamp > grid_.steps()) throw PartitionError("stamp outside the grid");
  auto it = std::upper_bound(points_.begin(), points_.end(), stamp);
  return values_.col(static_cast<Index>(it - points_.begin()) - 1);
}

Matrix LevelSeries::on_grid() const {
  Matrix out(values_.rows(), grid_.size());
  std::size_t j = 0;
  for (Index k = 0; k < grid_.size(); ++k) {
    while (j + 1 < points_.size() && points_[j + 1] <= k) ++j;
    out.col(k) = values_.col(static_cast<Index>(j));
  }
  return out;
}

MeasureSeries::MeasureSeries(LevelSeries series, bool nondecreasing)
    : LevelSeries(std::move(series)), nondecreasing_(nondecreasing) {}

MatrixSeries::MatrixSeries(TimeGrid grid, Index level, IndexList points, Index dim, Matrix values)
    : LevelSeries(std::move(grid), level, std::move(points), std::move(values)), dim_(dim) {
  if (values_.rows() != dim_ * dim_) throw ParameterError("matrix series row count is not d^2");
}

namespace {

void require_positions(const PartitionHierarchy& hier, const TimeGrid& grid) {
  if (hier.grid_steps() != grid.steps())
    throw GridError("partition hierarchy was built for a different grid");
}

}  // namespace

LevelSeries covariation(const SampledPath& x, Index i, const SampledPath& y, Index k,
                        const PartitionHierarchy& hier, Index level) {
  require_same_grid(x.grid(), y.grid(), "covariation");
  require_positions(hier, x.grid());
  if (i < 0 || i >= x.dim() || k < 0 || k >= y.dim())
    throw ParameterError("covariation component out of range");
  const IndexList& pts = hier.points(level);
  Matrix v = cumulative_cross_sums(x.values().row(i), y.values().row(k), pts);
  return LevelSeries(x.grid(), level, pts, std::move(v));
}

CovariationSeries covariation_matrix(const SampledPath& x, const PartitionHierarchy& hier,
                                     Index level) {
  require_positions(hier, x.grid());
  const IndexList& pts = hier.points(level);
  const Index d = x.dim();
  Matrix v = cumulative_cross_sums(x.values(), x.values(), pts);
  // Polarization is checked against independently summed [X_i +- X_j].
  double dev = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      const Eigen::RowVectorXd plus = x.values().row(i) + x.values().row(j);
      const Eigen::RowVectorXd minus = x.values().row(i) - x.values().row(j);
      const Matrix qp = cumulative_cross_sums(plus, plus, pts);
      const Matrix qm = cumulative_cross_sums(minus, minus, pts);
      const Eigen::RowVectorXd pol = (qp - qm) / 4.0;
      dev = std::max(dev, (v.row(j * d + i) - pol).cwiseAbs().maxCoeff());
    }
  return CovariationSeries(MatrixSeries(x.grid(), level, pts, d, std::move(v)), dev);
}

IntegralSeries follmer_integral(const SampledPath& xi, const SampledPath& x,
                                const PartitionHierarchy& hier, Index level) {
  require_same_grid(xi.grid(), x.grid(), "follmer_integral");
  require_positions(hier, x.grid());
  if (xi.dim() != x.dim()) throw ParameterError("integrand and integrator dimensions differ");
  const IndexList& pts = hier.points(level);
  Vector v = cumulative_riemann_sums(xi.values(), x.values(), pts);
  return LevelSeries(x.grid(), level, pts, v.transpose());
}

Vector stieltjes_integral(const Vector& f, const BVPath& a, Index component) {
  if (f.size() != a.grid().size()) throw GridError("stieltjes integrand is not on the BV grid");
  if (component < 0 || component >= a.dim()) throw ParameterError("BV component out of range");
  Vector out = Vector::Zero(f.size());
  for (Index k = 0; k + 1 < f.size(); ++k)
    out[k + 1] = out[k] + f[k] * (a.values()(component, k + 1) - a.values()(component, k));
  return out;
}

IntegralSeries stieltjes_integral(const Vector& f, const LevelSeries& m, Index row) {
  if (f.size() != m.grid().size()) throw GridError("stieltjes integrand is not on the series grid");
  Matrix out = Matrix::Zero(1, m.point_count());
  for (Index j = 0; j + 1 < m.point_count(); ++j) {
    const Index s = m.points()[static_cast<std::size_t>(j)];
    out(0, j + 1) = out(0, j) + f[s] * (m.values()(row, j + 1) - m.values()(row, j));
  }
  return LevelSeries(m.grid(), m.level(), m.points(), std::move(out));
}

IntegralSeries quadratic_stieltjes(const Matrix& w, const MatrixSeries& m) {
  if (w.cols() != m.grid().size() || w.rows() != m.dim())
    throw GridError("quadratic integrand does not match the measure");
  return matrix_stieltjes(
      [&](Index s) -> Matrix { return w.col(s) * w.col(s).transpose(); }, m);
}

double log_covariation_check(const SampledPath& s, const PartitionHierarchy& hier, Index level) {
  const SampledPath logs = log_path(s);
  double dev = 0.0;
  for (Index i = 0; i < s.dim(); ++i)
    for (Index j = i; j < s.dim(); ++j) {
      const LevelSeries ql = covariation(logs, i, logs, j, hier, level);
      const LevelSeries qs = covariation(s, i, s, j, hier, level);
      const Vector f = (s.values().row(i).array() * s.values().row(j).array()).inverse().transpose();
      const IntegralSeries rhs = stieltjes_integral(f, qs);
      dev = std::max(dev, (ql.values() - rhs.values()).cwiseAbs().maxCoeff());
    }
  return dev;
}

double max_log_quadratic_variation(const SampledPath& s, const PartitionHierarchy& hier,
                                   Index level) {
  const SampledPath logs = log_path(s);
  double q = 0.0;
  for (Index i = 0; i < s.dim(); ++i)
    q = std::max(q, covariation(logs, i, logs, i, hier, level).final_value());
  return q;
}

}  // namespace spt
