#pragma once

#ifdef CALRED_HAVE_OPENMP
#include <omp.h>
#endif

namespace calred {

// Caps the number of worker threads used inside operators. Values < 1 are
// ignored. Results never depend on the thread count: every parallel loop
// writes disjoint outputs and reduces in a fixed order.
inline void set_max_threads(int threads) {
#ifdef CALRED_HAVE_OPENMP
  if (threads >= 1) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

inline int max_threads() {
#ifdef CALRED_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace calred
