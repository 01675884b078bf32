#include <immintrin.h>

#include <cmath>
#include <limits>

#include "vmfaoa/kernels.hpp"

// AVX2/FMA variants of the particle kernels. Compiled only on x86-64 with
// -mavx2 -mfma; dispatch in kernels.cpp guards execution at runtime.

namespace vmfaoa::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void vmf_logw_accum_avx2(const double* px, const double* py, const double* pz,
                         std::size_t n, double sx, double sy, double sz,
                         double ux, double uy, double uz, double kappa,
                         double* logw) {
  const __m256d vsx = _mm256_set1_pd(sx);
  const __m256d vsy = _mm256_set1_pd(sy);
  const __m256d vsz = _mm256_set1_pd(sz);
  const __m256d vux = _mm256_set1_pd(ux);
  const __m256d vuy = _mm256_set1_pd(uy);
  const __m256d vuz = _mm256_set1_pd(uz);
  const __m256d vk = _mm256_set1_pd(kappa);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), vsx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), vsy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pz + i), vsz);
    const __m256d r2 =
        _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    const __m256d r = _mm256_sqrt_pd(r2);
    const __m256d d =
        _mm256_fmadd_pd(vuz, dz, _mm256_fmadd_pd(vuy, dy, _mm256_mul_pd(vux, dx)));
    const __m256d w = _mm256_div_pd(_mm256_mul_pd(vk, d), r);
    _mm256_storeu_pd(logw + i, _mm256_add_pd(_mm256_loadu_pd(logw + i), w));
  }
  for (; i < n; ++i) {
    const double dx = px[i] - sx;
    const double dy = py[i] - sy;
    const double dz = pz[i] - sz;
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    logw[i] += kappa * (ux * dx + uy * dy + uz * dz) / r;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum_squares_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double max_value_avx2(const double* a, std::size_t n) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d acc = _mm256_set1_pd(ninf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
  double m = hmax(acc);
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

}  // namespace vmfaoa::kernels::detail
