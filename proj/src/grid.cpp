#include "spt/grid.hpp"

#include <cmath>
#include <limits>

namespace spt {

TimeGrid::TimeGrid() : times_(std::make_shared<const Vector>(Vector::Zero(1))) {}

TimeGrid::TimeGrid(Vector times, std::string unit) : unit_(std::move(unit)) {
  if (times.size() < 1) throw GridError("time grid needs at least one stamp");
  for (Index k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw GridError("time grid stamp is not finite");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw GridError("time grid stamps must be strictly increasing (stamp " +
                      std::to_string(k) + ")");
  }
  times_ = std::make_shared<const Vector>(std::move(times));
}

TimeGrid TimeGrid::uniform(Index steps, double horizon, std::string unit) {
  if (steps < 1) throw GridError("uniform grid needs at least one step");
  if (!(horizon > 0) || !std::isfinite(horizon))
    throw GridError("uniform grid horizon must be positive");
  Vector t(steps + 1);
  for (Index k = 0; k <= steps; ++k)
    t[k] = static_cast<double>(k) * horizon / static_cast<double>(steps);
  return TimeGrid(std::move(t), std::move(unit));
}

Index TimeGrid::stamp_at_or_before(double t) const {
  const double* begin = times_->data();
  const double* end = begin + times_->size();
  const double* it = std::upper_bound(begin, end, t);
  if (it == begin) return 0;
  return static_cast<Index>(it - begin) - 1;
}

bool TimeGrid::operator==(const TimeGrid& other) const {
  if (times_ == other.times_) return true;
  return times_->size() == other.times_->size() && *times_ == *other.times_;
}

Index snap_to_step(const TimeGrid& grid, double& lo) {
  const Vector& ts = grid.times();
  const Index n = grid.steps();
  Index j = grid.stamp_at_or_before(lo);
  if (j < n) {
    const double step = ts[j + 1] - ts[j];
    if (ts[j + 1] - lo <= 1e-9 * step) {
      ++j;
      lo = ts[j];
    } else if (lo - ts[j] <= 1e-9 * step) {
      lo = ts[j];
    }
  }
  return j;
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) throw GridError(std::string(what) + ": series live on different time grids");
}

PartitionHierarchy::PartitionHierarchy(Index grid_steps, std::vector<IndexList> levels)
    : steps_(grid_steps), levels_(std::move(levels)) {
  if (steps_ < 1) throw RefinementError("partitions need a grid with at least one step");
  if (levels_.empty()) throw RefinementError("hierarchy needs at least one level");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const IndexList& pts = levels_[l];
    if (pts.size() < 2 || pts.front() != 0 || pts.back() != steps_)
      throw RefinementError("every level must contain both grid endpoints");
    for (std::size_t j = 1; j < pts.size(); ++j)
      if (pts[j] <= pts[j - 1]) throw RefinementError("level points must be strictly increasing");
    if (l > 0) {
      const IndexList& coarse = levels_[l - 1];
      if (!std::includes(pts.begin(), pts.end(), coarse.begin(), coarse.end()))
        throw RefinementError("levels must be nested");
    }
  }
  if (static_cast<Index>(levels_.back().size()) != steps_ + 1)
    throw RefinementError("finest level must be the full grid");

  successors_.resize(levels_.size());
  last_points_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const IndexList& pts = levels_[l];
    IndexList& succ = successors_[l];
    IndexList& last = last_points_[l];
    succ.assign(static_cast<std::size_t>(steps_ + 1), steps_);
    last.assign(static_cast<std::size_t>(steps_ + 1), 0);
    std::size_t j = 0;
    for (Index k = 0; k <= steps_; ++k) {
      while (j + 1 < pts.size() && pts[j + 1] <= k) ++j;
      last[static_cast<std::size_t>(k)] = pts[j];
      succ[static_cast<std::size_t>(k)] = j + 1 < pts.size() ? pts[j + 1] : steps_;
    }
  }
}

void PartitionHierarchy::check_level(Index level) const {
  if (level < 0 || level >= level_count())
    throw RefinementError("partition level " + std::to_string(level) + " out of range [0, " +
                          std::to_string(level_count() - 1) + "]");
}

const IndexList& PartitionHierarchy::points(Index level) const {
  check_level(level);
  return levels_[static_cast<std::size_t>(level)];
}

bool PartitionHierarchy::contains(Index level, Index stamp) const {
  const IndexList& pts = points(level);
  return std::binary_search(pts.begin(), pts.end(), stamp);
}

const IndexList& PartitionHierarchy::successor_map(Index level) const {
  check_level(level);
  return successors_[static_cast<std::size_t>(level)];
}

const IndexList& PartitionHierarchy::last_point_map(Index level) const {
  check_level(level);
  return last_points_[static_cast<std::size_t>(level)];
}

Index PartitionHierarchy::level_with_points(Index count) const {
  for (Index l = 0; l < level_count(); ++l)
    if (static_cast<Index>(levels_[static_cast<std::size_t>(l)].size()) >= count) return l;
  return finest_level();
}

PartitionHierarchy build_dyadic_hierarchy(const TimeGrid& grid, int depth) {
  const Index n = grid.steps();
  if (depth < 0 || depth > 62) throw RefinementError("dyadic depth out of range");
  const Index top = Index{1} << depth;
  if (top > n)
    throw RefinementError("dyadic depth " + std::to_string(depth) + " needs 2^depth <= N = " +
                          std::to_string(n));
  std::vector<IndexList> levels;
  for (int k = 0; k <= depth; ++k) {
    const Index m = Index{1} << k;
    IndexList pts(static_cast<std::size_t>(m + 1));
    // round(j N / m) with halves rounded up, in exact integer arithmetic.
    for (Index j = 0; j <= m; ++j) pts[static_cast<std::size_t>(j)] = (2 * j * n + m) / (2 * m);
    levels.push_back(std::move(pts));
  }
  if (top != n) {
    IndexList full(static_cast<std::size_t>(n + 1));
    for (Index k = 0; k <= n; ++k) full[static_cast<std::size_t>(k)] = k;
    levels.push_back(std::move(full));
  }
  return PartitionHierarchy(n, std::move(levels));
}

SampledPath::SampledPath(TimeGrid grid, Matrix values, std::vector<std::string> names)
    : grid_(std::move(grid)), values_(std::move(values)), names_(std::move(names)) {
  if (values_.cols() != grid_.size())
    throw GridError("path has " + std::to_string(values_.cols()) + " samples for a grid of " +
                    std::to_string(grid_.size()) + " stamps");
  if (values_.rows() < 1) throw ParameterError("path dimension must be positive");
  if (!values_.allFinite()) throw DomainError("path contains non-finite samples");
  if (!names_.empty() && static_cast<Index>(names_.size()) != values_.rows())
    throw ParameterError("path names do not match its dimension");
  positive_ = (values_.array() > 0.0).all();
}

Positivity validate_positive(const SampledPath& path) {
  return path.positive() ? Positivity::QVPlusCandidate : Positivity::NonPositive;
}

SampledPath log_path(const SampledPath& path) {
  if (!path.positive()) throw DomainError("log of a path with nonpositive samples");
  return SampledPath(path.grid(), path.values().array().log().matrix(), path.names());
}

SampledPath exp_path(const SampledPath& path) {
  return SampledPath(path.grid(), path.values().array().exp().matrix(), path.names());
}

BVPath::BVPath(TimeGrid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.cols() != grid_.size())
    throw GridError("BV path sample count does not match its grid");
  if (!values_.allFinite()) throw DomainError("BV path contains non-finite samples");
  total_variation_ = Matrix::Zero(values_.rows(), values_.cols());
  for (Index k = 1; k < values_.cols(); ++k)
    total_variation_.col(k) =
        total_variation_.col(k - 1) + (values_.col(k) - values_.col(k - 1)).cwiseAbs();
}

BVPath BVPath::empty(const TimeGrid& grid) {
  return BVPath(grid, Matrix::Zero(0, grid.size()));
}

BVPath moving_average(const SampledPath& path, double theta) {
  if (!(theta > 0) || !std::isfinite(theta))
    throw ParameterError("moving-average window must be positive");
  const TimeGrid& grid = path.grid();
  Matrix out(path.dim(), grid.size());
  for (Index k = 0; k < grid.size(); ++k)
    out.col(k) = window_average(grid, grid[k], theta, path.dim(),
                                [&](Index j) { return path.col(j); });
  return BVPath(grid, std::move(out));
}

}  // namespace spt
