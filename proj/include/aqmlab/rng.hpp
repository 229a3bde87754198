#pragma once

#include <cstdint>
#include <random>

namespace aqmlab {

/// Seeded generator with a platform-stable output sequence.
///
/// std::mt19937_64 has a fully specified sequence, but the standard
/// distributions do not, so uniform and normal variates are derived here
/// directly from the raw 64-bit output.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 42);

  /// Independent stream derived from (seed, stream) via splitmix64.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, second variate cached).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace aqmlab
