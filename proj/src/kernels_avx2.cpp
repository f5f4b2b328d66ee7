// Built with -mavx2 (see src/CMakeLists.txt). Only reached through the
// dispatcher after a CPUID check, so keep this TU free of std:: templates
// that could leak AVX2 code into other translation units.

#include "coevo/kernels.hpp"

#include <immintrin.h>

namespace coevo::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4)));
  }
  for (; j + 4 <= n; j += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

double weighted_sq_dist(const double* w, double center, const double* y, std::size_t n) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(c, _mm256_loadu_pd(y + j));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_mul_pd(d, d)));
  }
  double total = hsum(acc);
  for (; j < n; ++j) {
    const double d = center - y[j];
    total += w[j] * (d * d);
  }
  return total;
}

void matvec(const double* m, const double* v, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = dot(m + i * cols, v, cols);
}

}  // namespace coevo::kernels::avx2
