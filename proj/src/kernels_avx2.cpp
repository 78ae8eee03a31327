// AVX2+FMA backend. Compiled with -mavx2 -mfma; only reachable after the
// dispatcher has confirmed CPU support at runtime.
#include "bandit/kernels.hpp"

#if defined(BANDIT_KERNELS_AVX2)

#include <immintrin.h>

namespace bandit::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  acc0 = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Four rows at a time so each load of x feeds four accumulators.
void gemv_rm_avx2(const double* a, std::size_t m, std::size_t n,
                  const double* x, double* out) {
  std::size_t r = 0;
  for (; r + 4 <= m; r += 4) {
    const double* a0 = a + r * n;
    const double* a1 = a0 + n;
    const double* a2 = a1 + n;
    const double* a3 = a2 + n;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + j), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + j), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a2 + j), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a3 + j), xv, s3);
    }
    double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
    for (; j < n; ++j) {
      r0 += a0[j] * x[j];
      r1 += a1[j] * x[j];
      r2 += a2[j] * x[j];
      r3 += a3[j] * x[j];
    }
    out[r] = r0;
    out[r + 1] = r1;
    out[r + 2] = r2;
    out[r + 3] = r3;
  }
  for (; r < m; ++r) out[r] = dot_avx2(a + r * n, x, n);
}

}  // namespace

const Backend* avx2_backend_impl() {
  static const Backend backend{dot_avx2, axpy_avx2, gemv_rm_avx2, "avx2"};
  return &backend;
}

}  // namespace bandit::kern

#endif  // BANDIT_KERNELS_AVX2
