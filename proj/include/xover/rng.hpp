#pragma once

#include <cstdint>
#include <random>

namespace xover {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream-splitting rule: child = splitmix64(parent ^ splitmix64(stream)).
///
/// Every independent run (instance, algorithm, repeat) owns the stream derived
/// from its parent seed and a small integer index, so results never depend on
/// scheduling order.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return splitmix64(parent ^ splitmix64(stream));
}

/// Seeded random stream: mt19937_64 engine plus the draws the searchers need.
///
/// Normal variates come from std::normal_distribution (Marsaglia polar method in
/// libstdc++); sequences are reproducible within one build, not across
/// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child stream; same rule as split_seed.
  Rng stream(std::uint64_t index) const { return Rng(split_seed(seed_, index)); }

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() { return normal_(engine_); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace xover
