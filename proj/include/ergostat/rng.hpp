#pragma once

#include <cstdint>
#include <random>

namespace ergo {

// All experiment randomness flows from one 64-bit seed. Sub-streams are
// derived with splitmix64 so per-point work is reproducible independently
// of worker count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1); explicit mapping, not uniform_real_distribution,
  // so streams are identical on every standard library.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1} by rejection.
  std::uint32_t next_below(std::uint32_t n) {
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t v;
    do { v = engine_(); } while (v >= limit);
    return static_cast<std::uint32_t>(v % n);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ergo
