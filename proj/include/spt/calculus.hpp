#pragma once

// Pathwise covariation and Foellmer-type integrals along a fixed partition level.
//
// Every cumulative quantity produced at a partition level is stored at the
// level points only: value j is the sum over completed intervals
// [s_i, s_{i+1}] with s_{i+1} <= s_j. It starts at 0 and is piecewise
// constant between level points when read on the finest grid.

#include "spt/grid.hpp"

namespace spt {

/// Cumulative quantity (rows components) known at the points of one level.
class LevelSeries {
 public:
  LevelSeries() = default;
  LevelSeries(TimeGrid grid, Index level, IndexList points, Matrix values);

  const TimeGrid& grid() const { return grid_; }
  Index level() const { return level_; }
  const IndexList& points() const { return points_; }
  Index point_count() const { return static_cast<Index>(points_.size()); }
  Index rows() const { return values_.rows(); }

  /// rows x point_count.
  const Matrix& values() const { return values_; }
  double final_value(Index row = 0) const { return values_(row, values_.cols() - 1); }
  double time_at_point(Index j) const { return grid_[points_[static_cast<std::size_t>(j)]]; }

  /// Value in force at a finest-grid stamp.
  Vector at_stamp(Index stamp) const;
  /// Piecewise-constant reading on every stamp: rows x (N + 1).
  Matrix on_grid() const;

 protected:
  TimeGrid grid_;
  Index level_ = 0;
  IndexList points_;
  Matrix values_;
};

/// Scalar cumulative integral.
using IntegralSeries = LevelSeries;

/// Scalar measure: cumulative value of a (possibly signed) finite-variation
/// function. `nondecreasing` records whether it is a genuine measure.
class MeasureSeries : public LevelSeries {
 public:
  MeasureSeries() = default;
  MeasureSeries(LevelSeries series, bool nondecreasing);
  bool nondecreasing() const { return nondecreasing_; }

 private:
  bool nondecreasing_ = false;
};

/// Symmetric d x d matrix-valued cumulative series, column-major per point.
class MatrixSeries : public LevelSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(TimeGrid grid, Index level, IndexList points, Index dim, Matrix values);

  Index dim() const { return dim_; }
  /// d x d value at level point j.
  Eigen::Map<const Matrix> at_point(Index j) const {
    return Eigen::Map<const Matrix>(values_.col(j).data(), dim_, dim_);
  }
  /// Increment over the level interval [s_j, s_{j+1}].
  Matrix increment(Index j) const { return at_point(j + 1) - at_point(j); }
  /// Entry (i, k) at every level point.
  Vector entry(Index i, Index k) const { return values_.row(k * dim_ + i).transpose(); }
  Matrix final_matrix() const { return at_point(point_count() - 1); }

 private:
  Index dim_ = 0;
};

/// Pathwise covariation matrix with the polarization diagnostic
/// max |[X_i,X_j] - ([X_i+X_j] - [X_i-X_j]) / 4| over points and pairs.
class CovariationSeries : public MatrixSeries {
 public:
  CovariationSeries() = default;
  CovariationSeries(MatrixSeries series, double polarization_deviation)
      : MatrixSeries(std::move(series)), polarization_deviation_(polarization_deviation) {}
  double polarization_deviation() const { return polarization_deviation_; }

 private:
  double polarization_deviation_ = 0.0;
};

// --- expression-level kernels ------------------------------------------------

/// Cumulative sums of (x_i(s') - x_i(s)) (y_k(s') - y_k(s)) over the level
/// points; result is (dx * dy) x points.size(), entry (i, k) in row k * dx + i.
template <typename DX, typename DY>
Matrix cumulative_cross_sums(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                             const IndexList& points) {
  const Index dx = x.rows();
  const Index dy = y.rows();
  Matrix out = Matrix::Zero(dx * dy, static_cast<Index>(points.size()));
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const Index s = points[j];
    const Index e = points[j + 1];
    const Vector ix = x.col(e) - x.col(s);
    const Vector iy = y.col(e) - y.col(s);
    const Index c = static_cast<Index>(j);
    for (Index k = 0; k < dy; ++k)
      out.col(c + 1).segment(k * dx, dx) = out.col(c).segment(k * dx, dx) + ix * iy[k];
  }
  return out;
}

/// Cumulative left-point sums sum_i xi_i(s) (x_i(s') - x_i(s)) over the level points.
template <typename DXi, typename DX>
Vector cumulative_riemann_sums(const Eigen::MatrixBase<DXi>& xi, const Eigen::MatrixBase<DX>& x,
                               const IndexList& points) {
  Vector out = Vector::Zero(static_cast<Index>(points.size()));
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const Index s = points[j];
    const Index e = points[j + 1];
    const double inc = xi.col(s).dot(x.col(e) - x.col(s));
    out[static_cast<Index>(j) + 1] = out[static_cast<Index>(j)] + inc;
  }
  return out;
}

// --- public operations --------------------------------------------------------

/// [x_i, y_k] along `level`; both paths must share a grid.
LevelSeries covariation(const SampledPath& x, Index i, const SampledPath& y, Index k,
                        const PartitionHierarchy& hier, Index level);

/// Full covariation matrix of a d-dimensional path with the polarization diagnostic.
CovariationSeries covariation_matrix(const SampledPath& x, const PartitionHierarchy& hier,
                                     Index level);

/// sum over level intervals of xi(s) . (x(s') - x(s)); xi is d-dimensional on the same grid.
IntegralSeries follmer_integral(const SampledPath& xi, const SampledPath& x,
                                const PartitionHierarchy& hier, Index level);

/// Left-point Stieltjes integral of a scalar grid function f against component
/// `component` of a BV path, accumulated on the finest grid.
Vector stieltjes_integral(const Vector& f, const BVPath& a, Index component);

/// sum_l f(s_l) * (m(s_{l+1}) - m(s_l)) for a scalar integrand sampled on the
/// finest grid and row `row` of a level series.
IntegralSeries stieltjes_integral(const Vector& f, const LevelSeries& m, Index row = 0);

/// sum_l w(s_l)^T dM_l w(s_l) with w a d-dimensional grid series.
IntegralSeries quadratic_stieltjes(const Matrix& w, const MatrixSeries& m);
/// sum_l sum_ik H(s_l)_ik dM_l,ik where hess(k) returns the d x d integrand at stamp k.
template <typename HessAt>
IntegralSeries matrix_stieltjes(HessAt&& hess_at, const MatrixSeries& m) {
  Matrix out = Matrix::Zero(1, m.point_count());
  for (Index j = 0; j + 1 < m.point_count(); ++j) {
    const Index s = m.points()[static_cast<std::size_t>(j)];
    const Matrix h = hess_at(s);
    out(0, j + 1) = out(0, j) + (h.array() * m.increment(j).array()).sum();
  }
  return LevelSeries(m.grid(), m.level(), m.points(), std::move(out));
}

/// max_{i,j} max_t | [log S_i, log S_j](t) - int_0^t (S_i S_j)^{-1} d[S_i, S_j] |, absolute.
double log_covariation_check(const SampledPath& s, const PartitionHierarchy& hier, Index level);

/// Largest [log S_i](T) over components at `level`; scale for relative checks.
double max_log_quadratic_variation(const SampledPath& s, const PartitionHierarchy& hier,
                                   Index level);

}  // namespace spt
