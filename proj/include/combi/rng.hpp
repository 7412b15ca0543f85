#pragma once

#include "combi/bigint.hpp"

#include <cstdint>

namespace combi {

// Counter-based generator: output i is a keyed mix of (key, i).
// Copies replay the same stream; split() derives an independent child key,
// so CFTP can revisit time -t and parallel workers get seeds that do not
// depend on scheduling.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

  Rng split(std::uint64_t stream) const {
    Rng r;
    r.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [0, n), n >= 1, unbiased (Lemire)
  std::uint64_t uniform_index(std::uint64_t n);

  // uniform in [0, n), n >= 1, exact for arbitrary precision bounds
  BigInt uniform_below(const BigInt& n);

  bool bernoulli(double p) { return uniform01() < p; }

  double normal();

  std::uint64_t position() const { return counter_; }
  std::uint64_t key() const { return key_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace combi
