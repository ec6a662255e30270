#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace specdec {

/// Deterministic seeded generator. Every party owns its own instance; all
/// protocol randomness flows through explicit seeds so runs are replayable.
class Prng {
 public:
  explicit Prng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform value with the low `nbits` bits set (nbits in [1, 64]).
  uint64_t bits(int nbits) {
    uint64_t v = gen_();
    return nbits >= 64 ? v : (v & ((uint64_t{1} << nbits) - 1));
  }

  bool coin() { return (gen_() >> 63) != 0; }

  // Uniform in [0, 1) with 53-bit resolution; identical across platforms.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n). Modulo bias is below 2^-48 for n < 2^16.
  size_t index(size_t n) { return static_cast<size_t>(gen_() % n); }

  // Derives an independent stream; used to give sub-components their own seeds.
  uint64_t fork_seed() { return splitmix64(gen_()); }

  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace specdec
