#include "combi/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace combi {

BigInt binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt factorial(long n) {
  BigInt r = 1;
  for (long i = 2; i <= n; ++i) r *= i;
  return r;
}

BigInt pow_int(long base, long exp) {
  BigInt r = 1;
  BigInt b = base;
  while (exp > 0) {
    if (exp & 1) r *= b;
    b *= b;
    exp >>= 1;
  }
  return r;
}

namespace {

// |x| = m * 2^e with m holding the top 64 bits
void split_top(const BigInt& ax, std::uint64_t& m, long& e) {
  long bits = static_cast<long>(boost::multiprecision::msb(ax)) + 1;
  if (bits <= 64) {
    m = static_cast<std::uint64_t>(ax);
    e = 0;
  } else {
    e = bits - 64;
    m = static_cast<std::uint64_t>(BigInt(ax >> e));
  }
}

}  // namespace

double to_double(const BigInt& x) {
  if (x == 0) return 0.0;
  BigInt ax = abs(x);
  std::uint64_t m;
  long e;
  split_top(ax, m, e);
  double r = std::ldexp(static_cast<double>(m), static_cast<int>(std::min<long>(e, 100000)));
  return x < 0 ? -r : r;
}

double ratio_to_double(const BigInt& num, const BigInt& den) {
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  if (num == 0) return 0.0;
  bool neg = (num < 0) != (den < 0);
  BigInt a = abs(num), b = abs(den);
  long shift = static_cast<long>(boost::multiprecision::msb(b)) -
               static_cast<long>(boost::multiprecision::msb(a)) + 64;
  BigInt q = shift >= 0 ? BigInt((a << shift) / b) : BigInt(a / (b << -shift));
  double r = std::ldexp(to_double(q), static_cast<int>(std::clamp<long>(-shift, -100000, 100000)));
  return neg ? -r : r;
}

double log_bigint(const BigInt& x) {
  std::uint64_t m;
  long e;
  split_top(x, m, e);
  return std::log(static_cast<double>(m)) + static_cast<double>(e) * std::log(2.0);
}

std::string to_string(const BigInt& x) { return x.str(); }

}  // namespace combi
