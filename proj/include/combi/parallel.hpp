#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace combi {

// Worker count after applying COMBI_THREADS (if set) as a cap.
int worker_count();
// Applies the cap to the OpenMP runtime; idempotent.
void apply_thread_cap();

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Fixed pairwise tree over the given order.
double pairwise_sum(const std::vector<double>& xs);

constexpr std::size_t kReduceBlock = 512;

// Sum of term(i) for i in [0,n): fixed blocks summed with compensation, then
// combined pairwise. The result does not depend on the thread count.
template <class F>
double blocked_sum_serial(std::size_t n, F&& term) {
  std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> part(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    NeumaierSum s;
    std::size_t hi = std::min(n, (b + 1) * kReduceBlock);
    for (std::size_t i = b * kReduceBlock; i < hi; ++i) s.add(term(i));
    part[b] = s.value();
  }
  return pairwise_sum(part);
}

template <class F>
double blocked_sum(std::size_t n, F&& term) {
  long nb = static_cast<long>((n + kReduceBlock - 1) / kReduceBlock);
  std::vector<double> part(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    NeumaierSum s;
    std::size_t hi = std::min(n, (b + 1) * kReduceBlock);
    for (std::size_t i = b * kReduceBlock; i < hi; ++i) s.add(term(i));
    part[b] = s.value();
  }
  return pairwise_sum(part);
}

}  // namespace combi
