#include <cmath>
#include <cstddef>

#include "fieldctr/kernels.hpp"

// Reference kernels. Every op is a plain IEEE mul/add sequence so the SIMD
// variants can reproduce the elementwise results bit for bit.

namespace fieldctr::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void adam_update_scalar(double* param, const double* grad, double* m,
                        double* v, std::size_t n, const AdamScalars& s) {
  const double one_minus_b1 = 1.0 - s.beta1;
  const double one_minus_b2 = 1.0 - s.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    const double mi = s.beta1 * m[i] + one_minus_b1 * g;
    const double vi = s.beta2 * v[i] + one_minus_b2 * (g * g);
    m[i] = mi;
    v[i] = vi;
    const double mhat = mi * s.inv_bias1;
    const double vhat = vi * s.inv_bias2;
    const double step = s.lr * (mhat / (std::sqrt(vhat) + s.eps));
    param[i] = param[i] - step - s.lr * s.weight_decay * param[i];
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", dot_scalar, axpy_scalar,
                                 adam_update_scalar};
  return table;
}

}  // namespace fieldctr::kernels
