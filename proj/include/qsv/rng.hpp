#pragma once

#include <cstdint>
#include <span>

namespace qsv {

/// SplitMix64 generator (Steele, Lea & Flood; the java.util.SplittableRandom
/// mixer). Chosen for run reproducibility: the algorithm is a dozen lines,
/// has no hidden state, and produces identical streams from identical seeds
/// in any language, so recorded runs can serve as cross-implementation test
/// vectors. All randomness in this project flows through this engine.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Bernoulli draw: true with probability p (one uniform consumed).
  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from a finite distribution (one uniform consumed).
  /// Probabilities must sum to 1; the final bucket absorbs rounding slack.
  std::size_t discrete(std::span<const double> probabilities) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
      acc += probabilities[i];
      if (u < acc) return i;
    }
    return probabilities.empty() ? 0 : probabilities.size() - 1;
  }

 private:
  std::uint64_t state_;
};

/// Counter-based substream derivation: substream k of a master seed is
/// SplitMix64 output k of a generator seeded with the master seed. Trial i
/// of a run uses derive_seed(master_seed, i); the protocol session gives
/// the coordinator substream 0 and the referee substream 1.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t stream_index) {
  // Equivalent to seeding at master_seed and taking output #stream_index,
  // but O(1): the SplitMix64 state advances by a fixed additive constant.
  SplitMix64 g(master_seed + stream_index * 0x9e3779b97f4a7c15ull);
  return g();
}

}  // namespace qsv
