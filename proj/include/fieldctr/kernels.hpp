#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace fieldctr::kernels {

// Scalar constants of one Adam update, precomputed once per step.
// inv_bias1/inv_bias2 are 1/(1-beta^t) for the current step count.
struct AdamScalars {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double inv_bias1;
  double inv_bias2;
  double weight_decay;
};

// One set of inner-loop kernels. The scalar table is the reference
// semantics; SIMD tables must agree with it elementwise exactly for
// axpy/adam_update and within reduction-order rounding for dot.
struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*adam_update)(double* param, const double* grad, double* m, double* v,
                      std::size_t n, const AdamScalars& s);
};

const KernelTable& scalar_table();

// All tables usable on this CPU, scalar first.
std::vector<const KernelTable*> available_tables();

// Active table: best available unless FIELDCTR_KERNELS or select() says
// otherwise.
const KernelTable& active();

// Force a table by name ("scalar", "avx2", "neon"). Returns false if the
// name is unknown or unsupported on this CPU.
bool select(std::string_view name);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void adam_update(double* param, const double* grad, double* m,
                        double* v, std::size_t n, const AdamScalars& s) {
  active().adam_update(param, grad, m, v, n, s);
}

}  // namespace fieldctr::kernels
