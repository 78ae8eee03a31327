#pragma once

#include <cstddef>
#include <string_view>

namespace bandit::kern {

// Hot inner-loop primitives. Every entry point has a scalar reference
// implementation and, on x86-64 with AVX2+FMA, a vectorized variant.
// The backend is chosen once at startup (CPU detection, overridable via
// the BANDITSIM_KERNELS environment variable or select()) and never
// changes mid-run, so results are reproducible for a fixed backend.

using DotFn  = double (*)(const double* x, const double* y, std::size_t n);
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);
// out[i] = dot(A.row(i), x) for row-major A of shape m x n.
using GemvFn = void (*)(const double* a, std::size_t m, std::size_t n,
                        const double* x, double* out);

struct Backend {
  DotFn dot = nullptr;
  AxpyFn axpy = nullptr;
  GemvFn gemv_rm = nullptr;
  const char* name = "";
};

// Reference implementation, always available.
const Backend& scalar_backend();
// AVX2+FMA implementation; nullptr when the build or CPU lacks support.
const Backend* avx2_backend();

// Currently active backend. First call resolves BANDITSIM_KERNELS
// ("scalar", "avx2", "auto"); unset or "auto" picks the best supported.
const Backend& active();

// Force a backend by name ("scalar" | "avx2" | "auto"). Returns false and
// leaves the selection unchanged if the request cannot be satisfied.
// Not thread-safe; call before spawning workers.
bool select(std::string_view name);

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void gemv_rm(const double* a, std::size_t m, std::size_t n,
                    const double* x, double* out) {
  active().gemv_rm(a, m, n, x, out);
}

}  // namespace bandit::kern
