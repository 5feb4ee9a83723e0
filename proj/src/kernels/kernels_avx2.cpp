// AVX2 variants. Built with -mavx2 -mfma in its own TU; only reached when
// the dispatcher has confirmed CPU support.

#include "fieldctr/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

namespace fieldctr::kernels {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Elementwise kernels mirror the scalar op sequence exactly (mul/add/sqrt/div
// only), so results are bit-identical to the reference table.

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void adam_update_avx2(double* param, const double* grad, double* m, double* v,
                      std::size_t n, const AdamScalars& s) {
  const __m256d vb1 = _mm256_set1_pd(s.beta1);
  const __m256d vb2 = _mm256_set1_pd(s.beta2);
  const __m256d vomb1 = _mm256_set1_pd(1.0 - s.beta1);
  const __m256d vomb2 = _mm256_set1_pd(1.0 - s.beta2);
  const __m256d vib1 = _mm256_set1_pd(s.inv_bias1);
  const __m256d vib2 = _mm256_set1_pd(s.inv_bias2);
  const __m256d veps = _mm256_set1_pd(s.eps);
  const __m256d vlr = _mm256_set1_pd(s.lr);
  const __m256d vlrwd = _mm256_set1_pd(s.lr * s.weight_decay);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                      _mm256_mul_pd(vomb1, g));
    const __m256d vi =
        _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                      _mm256_mul_pd(vomb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_mul_pd(mi, vib1);
    const __m256d vhat = _mm256_mul_pd(vi, vib2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
    const __m256d p = _mm256_loadu_pd(param + i);
    _mm256_storeu_pd(
        param + i,
        _mm256_sub_pd(_mm256_sub_pd(p, step), _mm256_mul_pd(vlrwd, p)));
  }
  if (i < n) {
    scalar_table().adam_update(param + i, grad + i, m + i, v + i, n - i, s);
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, adam_update_avx2};
  return &table;
}

}  // namespace fieldctr::kernels

#else

namespace fieldctr::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace fieldctr::kernels

#endif
