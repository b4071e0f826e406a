#include "spt/synthetic.hpp"

#include <cmath>

namespace spt {

void SyntheticSpec::validate() const {
  if (assets < 1) throw ConfigError("synthetic spec needs at least one asset");
  if (steps < 1) throw ConfigError("synthetic spec needs at least one step");
  if (!(horizon > 0) || !std::isfinite(horizon)) throw ConfigError("synthetic horizon must be positive");
  if (drift.size() != assets) throw ConfigError("synthetic drift has the wrong length");
  if (initial.size() != assets) throw ConfigError("synthetic initial prices have the wrong length");
  if (diffusion.rows() != assets || diffusion.cols() != assets)
    throw ConfigError("synthetic diffusion factor must be assets x assets");
  if (!drift.allFinite()) throw ConfigError("synthetic drift is not finite");
  for (Index i = 0; i < assets; ++i)
    if (!diffusion.row(i).allFinite())
      throw ConfigError("synthetic diffusion row " + std::to_string(i + 1) + " is not finite");
  if (!initial.allFinite() || !(initial.array() > 0).all())
    throw ConfigError("synthetic initial prices must be positive");
}

SyntheticSpec SyntheticSpec::from_keys(const KeyValues& kv) {
  SyntheticSpec s;
  if (kv.has("assets")) s.assets = kv.integer("assets");
  else if (kv.has("initial")) s.assets = kv.vector("initial").size();
  else if (kv.has("drift")) s.assets = kv.vector("drift").size();
  else if (kv.has("diffusion")) s.assets = kv.matrix("diffusion").rows();
  if (s.assets < 1) throw ConfigError(kv.source() + ": assets must be positive");
  s.steps = kv.integer_or("steps", s.steps);
  s.horizon = kv.number_or("horizon", s.horizon);
  s.drift = kv.has("drift") ? kv.vector("drift") : Vector::Zero(s.assets);
  s.diffusion = kv.has("diffusion") ? kv.matrix("diffusion") : Matrix::Identity(s.assets, s.assets);
  s.initial = kv.has("initial") ? kv.vector("initial") : Vector::Ones(s.assets);
  if (kv.has("seed")) {
    const Index seed = kv.integer("seed");
    if (seed < 0) throw ConfigError(kv.source() + ": seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  s.validate();
  return s;
}

const std::vector<std::string>& SyntheticSpec::keys() {
  static const std::vector<std::string> k = {"assets",    "steps",   "horizon", "drift",
                                             "diffusion", "initial", "seed"};
  return k;
}

SyntheticSpec standard_test_market(Index steps, std::uint64_t seed) {
  SyntheticSpec s;
  s.assets = 3;
  s.steps = steps;
  s.horizon = 1.0;
  s.drift = Vector{{0.05, 0.0, -0.03}};
  s.diffusion = Matrix{{0.30, 0.00, 0.00}, {0.10, 0.25, 0.00}, {-0.05, 0.10, 0.35}};
  s.initial = Vector{{1.0, 2.0, 1.5}};
  s.seed = seed;
  return s;
}

double NormalStream::symmetric_uniform() {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = symmetric_uniform();
    v = symmetric_uniform();
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

SampledPath simulate_paths(const SyntheticSpec& spec) {
  spec.validate();
  const Index d = spec.assets;
  const double h = spec.horizon / static_cast<double>(spec.steps);
  const Vector step_drift = spec.drift * h;
  const Matrix factor = spec.diffusion * std::sqrt(h);
  NormalStream normals(spec.seed);

  Matrix logs(d, spec.steps + 1);
  logs.col(0) = spec.initial.array().log().matrix();
  Vector z(d);
  for (Index k = 0; k < spec.steps; ++k) {
    for (Index i = 0; i < d; ++i) z[i] = normals.next();
    logs.col(k + 1) = logs.col(k) + step_drift + factor * z;
  }
  std::vector<std::string> names;
  for (Index i = 0; i < d; ++i) names.push_back("S" + std::to_string(i + 1));
  return SampledPath(TimeGrid::uniform(spec.steps, spec.horizon), logs.array().exp().matrix(),
                     std::move(names));
}

}  // namespace spt
