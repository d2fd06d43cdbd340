#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace biaslab::par {

// Thread cap shared by every parallel kernel. Results are identical for any
// setting: kernels write per-index slots and reduce in fixed order.
int max_threads();
void set_max_threads(int n);

inline int thread_count_for(std::size_t work_items) {
  int t = max_threads();
  if (work_items < static_cast<std::size_t>(t)) t = static_cast<int>(work_items);
  return t < 1 ? 1 : t;
}

}  // namespace biaslab::par
