#pragma once

#include <cstdint>
#include <random>

namespace dglstm {

// Deterministic random source. mt19937_64 has a standard-specified output
// sequence; the uniform mappings below are fixed arithmetic, so streams do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); modulo bias is irrelevant at the n used here
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<uint64_t>(n)); }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; decorrelates (seed, salt) pairs such as per-epoch
// shuffle seeds derived from one training seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dglstm
