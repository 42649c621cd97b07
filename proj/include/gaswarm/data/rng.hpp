#pragma once

#include <cstddef>
#include <cstdint>

namespace gaswarm::data {

/// Source of uniform 64-bit words. Samplers take this interface so tests can
/// substitute scripted draws.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual std::uint64_t next_u64() = 0;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi]; returns lo when lo == hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), unbiased. n must be positive.
  std::size_t below(std::size_t n);
};

/// SplitMix64: a 64-bit counter advanced by the golden-ratio increment and
/// passed through a bijective finalizer. Streams keyed by (seed, stream,
/// index) are independent of evaluation order, so parallel and serial runs
/// draw identical numbers.
class SplitMix64 final : public RandomSource {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() override;

  [[nodiscard]] static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream,
                                         std::uint64_t index);
  [[nodiscard]] static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

/// Stream identifiers used by the generators.
enum Stream : std::uint64_t {
  kStreamSeedPool = 1,
  kStreamInitialState = 2,
  kStreamForecast = 3,
  kStreamScenario = 4,
};

}  // namespace gaswarm::data
