#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace mrlocal {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit key from a seed, a stream tag and an index.
/// Keys for distinct (seed, tag, index) triples are statistically unrelated.
std::uint64_t derive_key(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept;

/// Counter-based generator: the n-th output is a pure function of (key, n).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  CounterRng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept
      : key_(derive_key(seed, tag, index)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mrlocal
