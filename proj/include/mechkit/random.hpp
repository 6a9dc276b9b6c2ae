#ifndef MECHKIT_RANDOM_HPP
#define MECHKIT_RANDOM_HPP

#include <cstdint>
#include <limits>
#include <string_view>

namespace mechkit {

/** SplitMix64 finaliser. */
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/** FNV-1a over bytes; stable across platforms. */
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/**
 * Counter-based generator: output k is mix64(key + k * golden). Splitting
 * derives an independent key, so every consumer of randomness gets its own
 * replayable stream from one seed.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(mix64(key)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

  CounterRng split(std::uint64_t stream) const { return CounterRng(key_ ^ mix64(stream + 0x632BE59BD9B4E019ULL)); }

  /** Uniform double in [0,1). */
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mechkit

#endif  // MECHKIT_RANDOM_HPP
