// OpenMP index maps with a serial reference path.
//
// Every data-parallel kernel in the library (the L-infinity LP bank, support
// enumeration, multi-start restarts, Monte Carlo trials) writes its per-index
// result into a slot and aggregates afterwards, so the serial and parallel
// paths produce identical output.
#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace sparsecert {

enum class Exec { Serial, Parallel };

// Sets the OpenMP worker count; 0 leaves the runtime default.
inline void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

inline int thread_count() { return omp_get_max_threads(); }

// Calls fn(i) for i in [0, n). If any call throws, the exception from the
// lowest failing index is rethrown after the loop.
template <typename Fn>
void for_each_index(std::ptrdiff_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Serial || n < 2) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Maps fn over [0, n) into a vector, preserving index order.
template <typename T, typename Fn>
std::vector<T> map_indices(std::ptrdiff_t n, Exec exec, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(n));
  for_each_index(n, exec, [&](std::ptrdiff_t i) { out[static_cast<std::size_t>(i)] = fn(i); });
  return out;
}

}  // namespace sparsecert
