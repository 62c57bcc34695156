#pragma once

#include <cstdint>
#include <random>

namespace cmdp {

// SplitMix64 finalizer, used to derive well-separated stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// A seeded random stream. Streams derived from distinct (root, tag, index)
// triples are independent for all practical purposes, so episode sampling,
// the adversary and instance generation never share draws. Bit-stable across
// platforms: the engine is std::mt19937_64 (sequence fixed by the standard)
// and all conversions below avoid std::uniform_*_distribution.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derived(std::uint64_t root, std::uint64_t tag,
                              std::uint64_t index) {
    std::uint64_t s = mix64(root ^ mix64(tag ^ 0x7f4a7c15f39cc060ULL));
    s = mix64(s ^ mix64(index));
    return RandomStream(s);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform draw in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, ..., n-1}.
  int uniform_int(int n) {
    int k = static_cast<int>(uniform01() * n);
    return k < n ? k : n - 1;
  }

  // Index sampled from a probability vector (entries sum to ~1).
  int categorical(const double* probs, int n) {
    double u = uniform01();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return n - 1;  // absorb rounding residue
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cmdp
