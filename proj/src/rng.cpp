#include "mrlocal/rng.hpp"

namespace mrlocal {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::string_view tag, std::uint64_t index) noexcept {
  // FNV-1a over the tag, then fold in seed and index through the mixer.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t k = splitmix64(seed ^ splitmix64(h));
  return splitmix64(k ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

CounterRng::result_type CounterRng::operator()() noexcept {
  // Two mixing rounds over (key, counter); one round leaves detectable
  // correlation between neighbouring counters.
  const std::uint64_t c = counter_++;
  return splitmix64(splitmix64(key_ + c * 0x9e3779b97f4a7c15ULL) ^ key_);
}

}  // namespace mrlocal
