#include "bandit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace bandit::kern {

#if defined(BANDIT_KERNELS_AVX2)
const Backend* avx2_backend_impl();
#endif

const Backend* avx2_backend() {
#if defined(BANDIT_KERNELS_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_backend_impl() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const Backend* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") return avx2_backend();
  if (name == "auto" || name.empty()) {
    if (const Backend* v = avx2_backend()) return v;
    return &scalar_backend();
  }
  return nullptr;
}

std::atomic<const Backend*>& slot() {
  static std::atomic<const Backend*> current{[] {
    const char* env = std::getenv("BANDITSIM_KERNELS");
    const Backend* b = resolve(env ? std::string_view(env) : "auto");
    return b ? b : &scalar_backend();
  }()};
  return current;
}

}  // namespace

const Backend& active() { return *slot().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const Backend* b = resolve(name);
  if (!b) return false;
  slot().store(b, std::memory_order_relaxed);
  return true;
}

}  // namespace bandit::kern
