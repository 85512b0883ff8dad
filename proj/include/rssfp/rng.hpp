#pragma once

#include <array>
#include <cstdint>

namespace rssfp {

/// Purpose tags keep independent consumers of one scenario seed on disjoint
/// streams.
enum class StreamPurpose : std::uint64_t {
  kSurvey = 1,
  kQuery = 2,
  kTestPlacement = 3,
  kWalk = 4,
  kSegmentation = 5,
  kCollect = 6,
};

std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** seeded through SplitMix64. Every stream is derived from
/// (seed, purpose, a, b) so results do not depend on evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a = 0, std::uint64_t b = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Box-Muller; one standard normal per call, no cached spare.
  double normal(double mean, double stddev);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace rssfp
