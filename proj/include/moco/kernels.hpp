#pragma once

// Dense row-major matrix kernels used by the tape. Every kernel has a serial
// reference and an OpenMP variant that partitions output rows across threads.
// Each output element is accumulated by exactly one thread in the same order
// as the serial loop, so both variants are bit-identical.

#include <cstddef>

#include <omp.h>

namespace moco::kernels {

namespace serial {

// C[n x m] (+)= A[n x k] * B[k x m]
template <class T>
void matmul_nn(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < n; ++i) {
    T* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate)
      for (int j = 0; j < m; ++j) ci[j] = T(0);
    const T* ai = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T aip = ai[p];
      const T* bp = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

// C[n x m] (+)= A[n x k] * B[m x k]^T
template <class T>
void matmul_nt(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < n; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    T* ci = c + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const T* bj = b + static_cast<std::size_t>(j) * k;
      T s = T(0);
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

// C[n x m] (+)= A[k x n]^T * B[k x m]
template <class T>
void matmul_tn(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < n; ++i) {
    T* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate)
      for (int j = 0; j < m; ++j) ci[j] = T(0);
    for (int p = 0; p < k; ++p) {
      const T api = a[static_cast<std::size_t>(p) * n + i];
      const T* bp = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) ci[j] += api * bp[j];
    }
  }
}

}  // namespace serial

namespace parallel {

inline constexpr long kMinWork = 1L << 16;

inline bool worth_splitting(int n, int k, int m) {
  return n > 1 && static_cast<long>(n) * k * m >= kMinWork && !omp_in_parallel() &&
         omp_get_max_threads() > 1;
}

template <class T>
void matmul_nn(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  if (!worth_splitting(n, k, m)) return serial::matmul_nn(a, b, c, n, k, m, accumulate);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    serial::matmul_nn(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * m,
                      1, k, m, accumulate);
}

template <class T>
void matmul_nt(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  if (!worth_splitting(n, k, m)) return serial::matmul_nt(a, b, c, n, k, m, accumulate);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    serial::matmul_nt(a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * m,
                      1, k, m, accumulate);
}

template <class T>
void matmul_tn(const T* a, const T* b, T* c, int n, int k, int m, bool accumulate) {
  if (!worth_splitting(n, k, m)) return serial::matmul_tn(a, b, c, n, k, m, accumulate);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    T* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate)
      for (int j = 0; j < m; ++j) ci[j] = T(0);
    for (int p = 0; p < k; ++p) {
      const T api = a[static_cast<std::size_t>(p) * n + i];
      const T* bp = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) ci[j] += api * bp[j];
    }
  }
}

}  // namespace parallel

// The tape dispatches here.
using parallel::matmul_nn;
using parallel::matmul_nt;
using parallel::matmul_tn;

}  // namespace moco::kernels
