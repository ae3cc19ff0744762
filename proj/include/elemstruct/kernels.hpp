#pragma once

// Dense numeric kernels. Each kernel has a serial reference version
// (suffix _ref) used by the tests and an OpenMP version used everywhere
// else. Parallel loops assign each output element to exactly one thread,
// so results are bitwise identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace es::kernels {

// C[m x n] += or = A[m x k] * B[k x n]
template <class T>
void matmul_ref(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T acc = 0;
      for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

template <class T>
void matmul(const T* a, const T* b, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (static_cast<long>(m) * k * n > 16384)
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    std::fill(crow, crow + n, T(0));
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x n] = A[m x k] * B^T  where B is [n x k]
template <class T>
void matmul_bt(const T* a, const T* b, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (static_cast<long>(m) * k * n > 16384)
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * k;
      T acc = 0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

// C[k x n] += A^T * G  where A is [m x k], G is [m x n]
template <class T>
void matmul_at_accum(const T* a, const T* g, T* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) if (static_cast<long>(m) * k * n > 16384)
  for (int p = 0; p < k; ++p) {
    T* crow = c + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const T av = a[static_cast<std::size_t>(i) * k + p];
      const T* grow = g + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

template <class T>
void relu(const T* x, T* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void tanh_eval(const T* x, T* y, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    y[i] = std::tanh(x[i]);
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace es::kernels
