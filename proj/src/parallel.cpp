#include "biaslab/parallel.hpp"

#include <atomic>

namespace biaslab::par {

namespace {
std::atomic<int> g_max_threads{
#ifdef _OPENMP
    0  // 0 = use omp_get_max_threads() at call time
#else
    1
#endif
};
}

int max_threads() {
  int n = g_max_threads.load(std::memory_order_relaxed);
#ifdef _OPENMP
  if (n <= 0) n = omp_get_max_threads();
#endif
  return n < 1 ? 1 : n;
}

void set_max_threads(int n) { g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

}  // namespace biaslab::par
