#pragma once

#include <cstdint>
#include <vector>

namespace coxthin {

// Number of OpenMP threads the library will use: min(omp_get_max_threads,
// COXTHIN_THREADS when set).
int max_threads();

// Replicated-run driver. body(rep) fills exactly slot `rep` of any output it
// writes to; every rep derives its own RNG substream from the caller's seed,
// so results are bit-identical for any thread count, including 1.
template <class Body>
void parallel_reps(std::int64_t n_reps, Body&& body);

template <class Body>
void serial_reps(std::int64_t n_reps, Body&& body) {
  for (std::int64_t r = 0; r < n_reps; ++r) body(r);
}

}  // namespace coxthin

// implementation

#include <omp.h>

namespace coxthin {

template <class Body>
void parallel_reps(std::int64_t n_reps, Body&& body) {
  const int nt = max_threads();
  if (nt <= 1 || n_reps < 2) {
    serial_reps(n_reps, body);
    return;
  }
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
  for (std::int64_t r = 0; r < n_reps; ++r) body(r);
}

}  // namespace coxthin
