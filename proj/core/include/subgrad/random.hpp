#pragma once

#include <cstdint>
#include <random>

#include "subgrad/types.hpp"

namespace subgrad {

/// Seeded pseudo-random source.
///
/// Uniforms are built from the top 53 bits of std::mt19937_64, whose output
/// sequence is fixed by the standard, and normals use the Box-Muller
/// transform. Unlike std::normal_distribution, the resulting sequences are
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_open_low() { return 1.0 - uniform(); }

  double normal();

  /// Fills `out` with independent standard normals.
  void fill_normal(Eigen::Ref<Vector> out);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace subgrad
