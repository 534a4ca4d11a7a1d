#pragma once

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsc::par {

// Fixed block size for reductions. Partial sums are formed per block and
// combined in block order, so the result is identical for any thread count
// (including the serial reference below).
inline constexpr std::int64_t kBlock = 1024;

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Deterministic blocked sum, OpenMP over blocks.
template <class Term>
double blocked_sum(std::int64_t n, Term&& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t lo = b * kBlock;
    const std::int64_t hi = lo + kBlock < n ? lo + kBlock : n;
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

// Serial reference with the same blocking, bit-identical to blocked_sum.
template <class Term>
double blocked_sum_serial(std::int64_t n, Term&& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
  double total = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t lo = b * kBlock;
    const std::int64_t hi = lo + kBlock < n ? lo + kBlock : n;
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    total += s;
  }
  return total;
}

template <class Body>
void parallel_for(std::int64_t n, Body&& body) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace dsc::par
