#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

// Some OpenBLAS builds pick a kernel for the detected CPU that returns wrong
// dgemm results on certain virtualized hosts. The check below multiplies a
// fixed matrix pair large enough to hit the blocked kernels and, only if the
// result is wrong, re-initializes OpenBLAS with another core type. With a
// different BLAS the weak OpenBLAS hooks are null and nothing changes.

extern "C" {
int dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k, const double* alpha,
           const double* a, const int* lda, const double* b, const int* ldb, const double* beta, double* c,
           const int* ldc);
__attribute__((weak)) void gotoblas_dynamic_init(void);
__attribute__((weak)) void gotoblas_dynamic_quit(void);
}

namespace tnet::detail {

inline bool blas_gemm_ok() {
  const int n = 256;
  std::vector<double> a(n * n), b(n * n), c(n * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      a[j * n + i] = std::sin(0.37 * i + 1.3 * j);
      b[j * n + i] = std::cos(0.11 * i - 0.7 * j);
    }
  const double one = 1.0, zero = 0.0;
  dgemm_("N", "N", &n, &n, &n, &one, a.data(), &n, b.data(), &n, &zero, c.data(), &n);
  for (int j = 0; j < n; j += 37)
    for (int i = 0; i < n; i += 29) {
      double ref = 0.0;
      for (int k = 0; k < n; ++k) ref += a[k * n + i] * b[j * n + k];
      if (std::abs(ref - c[j * n + i]) > 1e-9 * n) return false;
    }
  return true;
}

inline bool ensure_blas_kernels() {
  static const bool ok = [] {
    if (blas_gemm_ok()) return true;
    if (!gotoblas_dynamic_init || !gotoblas_dynamic_quit || std::getenv("OPENBLAS_CORETYPE")) return false;
    for (const char* core : {"SkylakeX", "Haswell", "Sandybridge", "Nehalem"}) {
      setenv("OPENBLAS_CORETYPE", core, 1);
      gotoblas_dynamic_quit();
      gotoblas_dynamic_init();
      if (blas_gemm_ok()) return true;
    }
    return false;
  }();
  return ok;
}

}  // namespace tnet::detail
