#include "gaswarm/data/rng.hpp"

namespace gaswarm::data {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

double RandomSource::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * uniform();
}

std::size_t RandomSource::below(std::size_t n) {
  // Lemire's multiply-and-reject
  const std::uint64_t range = n;
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next_u64() {
  state_ += kGolden;
  return mix(state_);
}

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return SplitMix64(mix(mix(seed) ^ mix(stream * kGolden + 1)) ^ mix(index + kGolden));
}

}  // namespace gaswarm::data
