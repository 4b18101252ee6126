#pragma once

#include <cstdint>
#include <random>

namespace owcsim {

/// Deterministic random source bound to a (seed, stream_id) pair. Identical
/// pairs replay the identical sequence; distinct stream ids give independent
/// streams. Every random draw in this library flows through a RandomSource;
/// there is no ambient randomness. Instances are single-owner: one source per
/// (realization, purpose), never shared across threads.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; consumes two uniforms per draw.
  double normal();
  /// Exponential with the given mean.
  double exponential(double mean);
  /// Unbiased integer in [0, n), rejection-sampled. n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Stream-id blocks; an index (trajectory, realization, model, ...) is added
/// to the block base. Keeping the blocks disjoint makes training data and
/// evaluation data held-out by construction.
namespace streams {
inline constexpr std::uint64_t kTrainingTrajectory = 1ull << 32;
inline constexpr std::uint64_t kModelInit = 2ull << 32;      // + horizon_steps
inline constexpr std::uint64_t kEvalRealization = 3ull << 32;  // + realization
inline constexpr std::uint64_t kRateTimeseries = 4ull << 32;
}  // namespace streams

}  // namespace owcsim
