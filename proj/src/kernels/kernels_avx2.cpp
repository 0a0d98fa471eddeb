#include "hessmooth/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HESSMOOTH_HAVE_X86 1
#include <immintrin.h>
#endif

namespace hessmooth::kernels::avx2 {

#if defined(HESSMOOTH_HAVE_X86)

#define HESSMOOTH_AVX2 __attribute__((target("avx2,fma")))

namespace {

HESSMOOTH_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

bool compiled() { return true; }

HESSMOOTH_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double res = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) res += a[i] * b[i];
  return res;
}

// mul + add (no fma) keeps the result bitwise equal to the scalar loop.
HESSMOOTH_AVX2 void axpy(double alpha, const double* x, double* y,
                         std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

HESSMOOTH_AVX2 void csr_spmv(const std::int32_t* row_ptr,
                             const std::int32_t* cols, const double* vals,
                             const double* x, double* y, std::size_t nrows) {
  for (std::size_t r = 0; r < nrows; ++r) {
    std::int32_t k = row_ptr[r];
    const std::int32_t end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx =
          _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(vals + k), xv, acc);
    }
    double res = hsum(acc);
    for (; k < end; ++k) res += vals[k] * x[cols[k]];
    y[r] = res;
  }
}

HESSMOOTH_AVX2 void soft_threshold(const double* in, double t, double* out,
                                   std::size_t n) {
  const __m256d hi = _mm256_set1_pd(t);
  const __m256d lo = _mm256_set1_pd(-t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    const __m256d clamped = _mm256_min_pd(_mm256_max_pd(v, lo), hi);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(v, clamped));
  }
  scalar::soft_threshold(in + i, t, out + i, n - i);
}

#else

bool compiled() { return false; }
double dot(const double* a, const double* b, std::size_t n) {
  return scalar::dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  scalar::axpy(alpha, x, y, n);
}
void csr_spmv(const std::int32_t* row_ptr, const std::int32_t* cols,
              const double* vals, const double* x, double* y,
              std::size_t nrows) {
  scalar::csr_spmv(row_ptr, cols, vals, x, y, nrows);
}
void soft_threshold(const double* in, double t, double* out, std::size_t n) {
  scalar::soft_threshold(in, t, out, n);
}

#endif

}  // namespace hessmooth::kernels::avx2
