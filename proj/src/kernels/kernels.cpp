#include "fieldctr/kernels.hpp"

#include <cstdlib>
#include <string>

namespace fieldctr::kernels {

const KernelTable* avx2_table();
const KernelTable* neon_table();

namespace {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* simd_table() {
#if defined(__aarch64__)
  return neon_table();
#else
  return cpu_supports_avx2() ? avx2_table() : nullptr;
#endif
}

const KernelTable* lookup(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return cpu_supports_avx2() ? avx2_table() : nullptr;
  if (name == "neon") return neon_table();
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("FIELDCTR_KERNELS")) {
    if (const KernelTable* t = lookup(env)) return t;
  }
  if (const KernelTable* t = simd_table()) return t;
  return &scalar_table();
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = initial_table();
  return slot;
}

}  // namespace

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables{&scalar_table()};
  if (const KernelTable* t = simd_table()) tables.push_back(t);
  return tables;
}

const KernelTable& active() { return *active_slot(); }

bool select(std::string_view name) {
  const KernelTable* t = lookup(name);
  if (t == nullptr) return false;
  active_slot() = t;
  return true;
}

}  // namespace fieldctr::kernels
