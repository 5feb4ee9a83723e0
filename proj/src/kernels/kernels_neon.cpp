// NEON variants for aarch64. Same contract as the AVX2 TU: elementwise ops
// mirror the scalar sequence exactly, reductions may reorder.

#include "fieldctr/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

namespace fieldctr::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  acc0 = vaddq_f64(acc0, acc1);
  double acc = vgetq_lane_f64(acc0, 0) + vgetq_lane_f64(acc0, 1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vy = vld1q_f64(y + i);
    const float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(y + i, vaddq_f64(vy, vmulq_f64(va, vx)));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void adam_update_neon(double* param, const double* grad, double* m, double* v,
                      std::size_t n, const AdamScalars& s) {
  const float64x2_t vb1 = vdupq_n_f64(s.beta1);
  const float64x2_t vb2 = vdupq_n_f64(s.beta2);
  const float64x2_t vomb1 = vdupq_n_f64(1.0 - s.beta1);
  const float64x2_t vomb2 = vdupq_n_f64(1.0 - s.beta2);
  const float64x2_t vib1 = vdupq_n_f64(s.inv_bias1);
  const float64x2_t vib2 = vdupq_n_f64(s.inv_bias2);
  const float64x2_t veps = vdupq_n_f64(s.eps);
  const float64x2_t vlr = vdupq_n_f64(s.lr);
  const float64x2_t vlrwd = vdupq_n_f64(s.lr * s.weight_decay);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi =
        vaddq_f64(vmulq_f64(vb1, vld1q_f64(m + i)), vmulq_f64(vomb1, g));
    const float64x2_t vi = vaddq_f64(vmulq_f64(vb2, vld1q_f64(v + i)),
                                     vmulq_f64(vomb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t mhat = vmulq_f64(mi, vib1);
    const float64x2_t vhat = vmulq_f64(vi, vib2);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(vhat), veps);
    const float64x2_t step = vmulq_f64(vlr, vdivq_f64(mhat, denom));
    const float64x2_t p = vld1q_f64(param + i);
    vst1q_f64(param + i, vsubq_f64(vsubq_f64(p, step), vmulq_f64(vlrwd, p)));
  }
  if (i < n) {
    scalar_table().adam_update(param + i, grad + i, m + i, v + i, n - i, s);
  }
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{"neon", dot_neon, axpy_neon, adam_update_neon};
  return &table;
}

}  // namespace fieldctr::kernels

#else

namespace fieldctr::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace fieldctr::kernels

#endif
