#pragma once

#include <cstdint>
#include <limits>

namespace cbsae {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `master`. Used for per-replicate and
/// per-chain streams so that parallel and sequential runs see identical draws.
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(~index));
}

/// Counter-based generator: the n-th output is a pure function of (key, n).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    return splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_);
  }

  constexpr std::uint64_t counter() const { return counter_; }

  // Uniform index in [0, n) by multiply-shift; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    __extension__ using wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<wide>((*this)()) * n) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cbsae
