#include "combi/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace combi {

int worker_count() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_num_procs();
#endif
  if (const char* env = std::getenv("COMBI_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (...) {
    }
  }
  return n < 1 ? 1 : n;
}

void apply_thread_cap() {
#ifdef _OPENMP
  omp_set_num_threads(worker_count());
#endif
}

double pairwise_sum(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  std::vector<double> cur = xs;
  while (cur.size() > 1) {
    std::vector<double> next((cur.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = 2 * i + 1 < cur.size() ? cur[2 * i] + cur[2 * i + 1] : cur[2 * i];
    cur.swap(next);
  }
  return cur[0];
}

}  // namespace combi
