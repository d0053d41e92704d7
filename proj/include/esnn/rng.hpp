#pragma once
// Deterministic random streams. Every random draw in the library flows
// through RngStream so a run is reproducible bit-for-bit from (config, seed):
// the generator and the uniform mappings are fixed algorithms rather than
// implementation-defined standard library distributions.

#include <cstdint>
#include <random>
#include <string_view>

namespace esnn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// FNV-1a over the purpose tag; keeps child streams for different purposes
// decorrelated even when their indices coincide.
inline std::uint64_t hash64(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Child seed for stream (purpose, index) under a master seed.
inline std::uint64_t split_seed(std::uint64_t master, std::string_view purpose,
                                std::uint64_t index = 0) {
  std::uint64_t s = master ^ hash64(purpose);
  const std::uint64_t mixed = splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ull * (index + 1);
  return splitmix64(s) ^ mixed;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53 mantissa bits; identical on every platform.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n); n is small here so the double mapping is safe.
  std::size_t uniform_index(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace esnn
