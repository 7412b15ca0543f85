#include "combi/rng.hpp"

#include <cmath>

namespace combi {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

BigInt Rng::uniform_below(const BigInt& n) {
  if (n <= BigInt(std::numeric_limits<std::uint64_t>::max()))
    return BigInt(uniform_index(static_cast<std::uint64_t>(n)));
  unsigned bits = boost::multiprecision::msb(n) + 1;
  unsigned words = (bits + 63) / 64;
  unsigned top = bits - 64 * (words - 1);
  for (;;) {
    BigInt r = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t v = next_u64();
      if (w == 0 && top < 64) v &= (std::uint64_t{1} << top) - 1;
      r = (r << 64) | v;
    }
    if (r < n) return r;
  }
}

double Rng::normal() {
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace combi
