#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace lossbar {

// Execution policy for the data-parallel kernels. workers == 1 selects the
// serial reference loop; anything else runs the same body under OpenMP.
// Kernels write results into per-index slots and reduce afterwards in index
// order, so the output never depends on the worker count.
struct Exec {
  int workers = 1;

  static Exec serial() { return Exec{1}; }
  static Exec all() { return Exec{omp_get_max_threads()}; }
  bool parallel() const { return workers > 1; }
};

// Runs body(i) for i in [0, n). Exceptions thrown inside the parallel region
// are captured and the one from the lowest index is rethrown.
template <class Body>
void for_each_index(const Exec& exec, std::size_t n, Body&& body) {
  if (!exec.parallel() || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::size_t first_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(exec.workers)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace lossbar
