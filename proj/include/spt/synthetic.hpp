#pragma once

// Seeded correlated log-normal price paths on a uniform grid.

#include "spt/io.hpp"

#include <cstdint>
#include <random>

namespace spt {

/// Identity of the generator, written to every summary.
inline constexpr const char* kRngName =
    "mt19937_64 (std, default parameters), 53-bit uniforms, Marsaglia polar normals";

/// log S_{k+1} = log S_k + drift * h + diffusion * sqrt(h) * Z_k, Z_k iid N(0, I),
/// h = horizon / steps. `diffusion` is a d x d factor, normally lower-triangular.
struct SyntheticSpec {
  Index assets = 1;
  Index steps = Index{1} << 16;
  double horizon = 1.0;
  Vector drift;
  Matrix diffusion;
  Vector initial;
  std::uint64_t seed = 42;

  /// Positive initial prices, finite drift and factor, matching dimensions.
  void validate() const;

  /// Defaults: assets from the first given vector (else 1), zero drift,
  /// identity diffusion, unit initial prices, 2^16 steps, horizon 1, seed 42.
  static SyntheticSpec from_keys(const KeyValues& kv);
  /// Keys read by from_keys.
  static const std::vector<std::string>& keys();
};

/// Three-asset market used by the checks: correlated factor, mixed drifts.
SyntheticSpec standard_test_market(Index steps = Index{1} << 16, std::uint64_t seed = 42);

/// Standard normals from a 64-bit Mersenne twister via the polar method.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  /// Uniform on (-1, 1) from the top 53 bits.
  double symmetric_uniform();

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

SampledPath simulate_paths(const SyntheticSpec& spec);

}  // namespace spt
