#pragma once

#include <cstdint>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mmdlab {

// Global worker count. 1 forces the serial path (bit-exact mode).
int thread_count();
void set_thread_count(int n);

// Data-parallel loop over [0, n). The body must write only to its own
// per-index slots; reductions happen afterwards in index order, so the
// result is identical for any worker count. If bodies throw, the exception
// of the lowest index is rethrown, independent of scheduling.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
  if (thread_count() > 1 && n > 1 && !omp_in_parallel()) {
    std::mutex mtx;
    std::exception_ptr first_error;
    std::int64_t first_index = n;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace mmdlab
