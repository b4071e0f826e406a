#pragma once

// Hand-rolled generators for property tests: every case is reproducible from
// its seed, which doctest prints through CAPTURE on failure.

#include "spt/backtest.hpp"

#include <random>

namespace spt::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Index integer(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>()(engine_); }

  /// Strictly increasing stamps with irregular spacing.
  TimeGrid grid(Index steps) {
    Vector t(steps + 1);
    t[0] = uniform(-1.0, 1.0);
    for (Index k = 1; k <= steps; ++k) t[k] = t[k - 1] + uniform(0.1, 2.0) / static_cast<double>(steps);
    return TimeGrid(std::move(t));
  }

  /// Gaussian random walk with per-step scale sqrt(dt).
  SampledPath walk(const TimeGrid& g, Index d, double scale = 1.0) {
    Matrix x(d, g.size());
    for (Index i = 0; i < d; ++i) x(i, 0) = normal();
    for (Index k = 1; k < g.size(); ++k)
      for (Index i = 0; i < d; ++i)
        x(i, k) = x(i, k - 1) + scale * std::sqrt(g[k] - g[k - 1]) * normal();
    return SampledPath(g, std::move(x));
  }

  /// exp of a walk: strictly positive prices.
  SampledPath prices(const TimeGrid& g, Index d, double vol = 0.3) {
    return exp_path(walk(g, d, vol));
  }

  Vector simplex_point(Index d) {
    Vector x(d);
    for (Index i = 0; i < d; ++i) x[i] = uniform(0.05, 1.0);
    return x / x.sum();
  }

  WeightSeries weights(const TimeGrid& g, Index d) {
    Matrix w(d, g.size());
    for (Index k = 0; k < g.size(); ++k) w.col(k) = simplex_point(d);
    return WeightSeries(g, std::move(w), WeightScheme::Custom);
  }

 private:
  std::mt19937_64 engine_;
};

inline SampledPath path_of(std::initializer_list<std::initializer_list<double>> rows,
                           TimeGrid grid = {}) {
  const Index d = static_cast<Index>(rows.size());
  const Index n = static_cast<Index>(rows.begin()->size());
  Matrix x(d, n);
  Index i = 0;
  for (const auto& r : rows) {
    Index k = 0;
    for (const double v : r) x(i, k++) = v;
    ++i;
  }
  if (grid.size() != n) grid = TimeGrid::uniform(n - 1, static_cast<double>(n - 1));
  return SampledPath(std::move(grid), std::move(x));
}

inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace spt::testing
