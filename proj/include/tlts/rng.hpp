#pragma once

#include <cstdint>
#include <random>

namespace tlts {

/// Seeded generator used by every simulator.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The user seed is passed through one SplitMix64 step so that
/// adjacent seeds start from unrelated states. Uniforms take the top 53 bits
/// of each draw; normals use the Box-Muller transform with both outputs
/// consumed in order. None of the std:: distribution classes are used, since
/// their algorithms vary between standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tlts
