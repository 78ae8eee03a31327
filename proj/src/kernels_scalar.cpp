#include "bandit/kernels.hpp"

namespace bandit::kern {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv_rm_scalar(const double* a, std::size_t m, std::size_t n,
                    const double* x, double* out) {
  for (std::size_t i = 0; i < m; ++i) out[i] = dot_scalar(a + i * n, x, n);
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{dot_scalar, axpy_scalar, gemv_rm_scalar,
                               "scalar"};
  return backend;
}

}  // namespace bandit::kern
