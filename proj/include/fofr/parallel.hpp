#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fofr {

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs f(i) for i in [0, n). threads == 1 takes the plain serial loop
/// (the reference path used by the determinism tests and the benchmark);
/// threads == 0 uses the OpenMP default team size. Iterations must be
/// independent and must only write to their own output slots; f must not
/// throw. Results are then identical for every thread count.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& f, int threads = 0) {
  if (n <= 0) return;
#ifdef _OPENMP
  if (threads != 1 && !omp_in_parallel()) {
    if (threads > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
      for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    } else {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
    }
    return;
  }
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
}

}  // namespace fofr
