#pragma once

// Time grids, nested refining partitions and sampled path containers.
//
// A sampled path is read as a cadlag step function: on [t_k, t_{k+1}) it
// takes the value sampled at t_k, and after t_N it stays at the last sample.
// Window integrals and the functional calculus rely on that reading.

#include "spt/types.hpp"

#include <algorithm>
#include <memory>
#include <span>
#include <string>

namespace spt {

class TimeGrid {
 public:
  TimeGrid();
  explicit TimeGrid(Vector times, std::string unit = {});

  /// t_k = k * horizon / steps, k = 0..steps.
  static TimeGrid uniform(Index steps, double horizon, std::string unit = {});

  Index steps() const { return times_->size() - 1; }
  Index size() const { return times_->size(); }
  double operator[](Index k) const { return (*times_)[k]; }
  double front() const { return (*times_)[0]; }
  double back() const { return (*times_)[steps()]; }
  double horizon() const { return back() - front(); }
  const Vector& times() const { return *times_; }
  const std::string& unit() const { return unit_; }

  /// Largest k with t_k <= t; 0 when t precedes the grid.
  Index stamp_at_or_before(double t) const;

  bool operator==(const TimeGrid& other) const;

 private:
  std::shared_ptr<const Vector> times_;
  std::string unit_;
};

/// Throws GridError unless both grids hold identical stamps.
void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what);

/// Nested index subsets of a TimeGrid, level 0 coarsest, last level the full grid.
class PartitionHierarchy {
 public:
  PartitionHierarchy(Index grid_steps, std::vector<IndexList> levels);

  Index grid_steps() const { return steps_; }
  Index level_count() const { return static_cast<Index>(levels_.size()); }
  Index finest_level() const { return level_count() - 1; }

  const IndexList& points(Index level) const;
  bool contains(Index level, Index stamp) const;

  /// For every grid stamp k: the smallest level point strictly after k (N for k = N).
  const IndexList& successor_map(Index level) const;
  /// For every grid stamp k: the largest level point at or before k.
  const IndexList& last_point_map(Index level) const;

  /// Level whose point count is closest to (and at least) `count`; used to
  /// address levels by resolution rather than by position.
  Index level_with_points(Index count) const;

 private:
  void check_level(Index level) const;

  Index steps_;
  std::vector<IndexList> levels_;
  std::vector<IndexList> successors_;
  std::vector<IndexList> last_points_;
};

/// Level k holds round(j * N / 2^k), j = 0..2^k. When 2^depth != N the full
/// grid is appended as an extra finest level.
PartitionHierarchy build_dyadic_hierarchy(const TimeGrid& grid, int depth);

/// d-dimensional path sampled on the finest grid; column k is the value at t_k.
class SampledPath {
 public:
  SampledPath() = default;
  SampledPath(TimeGrid grid, Matrix values, std::vector<std::string> names = {});

  const TimeGrid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  Index dim() const { return values_.rows(); }
  Index steps() const { return grid_.steps(); }
  auto col(Index k) const { return values_.col(k); }
  double operator()(Index i, Index k) const { return values_(i, k); }
  bool positive() const { return positive_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  TimeGrid grid_;
  Matrix values_;
  std::vector<std::string> names_;
  bool positive_ = false;
};

enum class Positivity { QVPlusCandidate, NonPositive };

Positivity validate_positive(const SampledPath& path);

/// Componentwise log; DomainError on nonpositive samples.
SampledPath log_path(const SampledPath& path);
SampledPath exp_path(const SampledPath& path);

/// Continuous path of finite variation sampled on the grid.
class BVPath {
 public:
  BVPath() = default;
  BVPath(TimeGrid grid, Matrix values);

  /// m = 0 path: carries the grid only.
  static BVPath empty(const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  const Matrix& total_variation() const { return total_variation_; }
  Index dim() const { return values_.rows(); }
  auto col(Index k) const { return values_.col(k); }

 private:
  TimeGrid grid_;
  Matrix values_;
  Matrix total_variation_;
};

/// Index j of the step interval [t_j, t_{j+1}) containing `lo` (lo >= t_0).
/// A `lo` within 1e-9 of a step from a stamp is snapped onto it, so that
/// integer-step windows on uniform grids start exactly at a stamp.
Index snap_to_step(const TimeGrid& grid, double& lo);

/// (1/theta) * integral over [t - theta, t] of the step reading of a path,
/// with values before t_0 frozen at the first sample. `column_at(j)` must
/// return the value on [t_j, t_{j+1}) (and on [t_N, inf) for j = N).
template <typename ColumnAt>
Vector window_average(const TimeGrid& grid, double t, double theta, Index dim,
                      ColumnAt&& column_at) {
  const Vector& ts = grid.times();
  const Index n = grid.steps();
  Vector acc = Vector::Zero(dim);
  double lo = t - theta;
  if (lo < ts[0]) {
    acc += column_at(Index{0}) * (ts[0] - lo);
    lo = ts[0];
  }
  Index j = snap_to_step(grid, lo);
  while (lo < t) {
    const double hi = j < n ? std::min(ts[j + 1], t) : t;
    if (hi > lo) acc += column_at(j) * (hi - lo);
    lo = hi;
    ++j;
  }
  return acc / theta;
}

/// Left-point moving average alpha(t) = (1/theta) * int_{t-theta}^t x(0 v s) ds
/// evaluated at every stamp. ParameterError for theta <= 0.
BVPath moving_average(const SampledPath& path, double theta);

}  // namespace spt
