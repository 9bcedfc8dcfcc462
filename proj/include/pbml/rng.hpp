#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>

namespace pbml {

/// SplitMix64 finalizer. Bijective avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Folds a sequence of words into one stream key.
constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto w : words) h = mix64(h ^ mix64(w));
  return h;
}

/// Reserved third key word for streams that are not tied to a genome.
namespace stream_tag {
inline constexpr std::uint64_t kWorldHook = 0xFFFFFFFFFFFFFF01ULL;
inline constexpr std::uint64_t kWorldBuild = 0xFFFFFFFFFFFFFF02ULL;
inline constexpr std::uint64_t kTieBreak = 0xFFFFFFFFFFFFFF03ULL;
inline constexpr std::uint64_t kInit = 0xFFFFFFFFFFFFFF04ULL;
inline constexpr std::uint64_t kTransfer = 0xFFFFFFFFFFFFFF05ULL;
}  // namespace stream_tag

/// Counter-based random stream.
///
/// The i-th draw is mix64(key + i * golden), so a stream is fully determined
/// by its key and can be created anywhere (any thread, any order) without
/// touching shared state. Engine streams are keyed by
/// (master_seed, generation, genome id).
///
/// Normal variates come from std::normal_distribution driven by the stream,
/// so streams are reproducible for a given standard library.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) noexcept : key_(key) {}
  Stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept
      : key_(derive_key({seed, a, b})) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double normal() { return normal_(*this); }

  /// Index drawn with probability proportional to weights (non-negative,
  /// positive sum).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive sum");
    const double target = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (target < acc) return i;
    }
    // Rounding can leave target == total; return the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return i;
    return weights.size() - 1;
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_;
};

}  // namespace pbml
