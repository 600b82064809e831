#include "kacov/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace kacov::simd {

#if KACOV_HAVE_AVX2
const KernelTable& avx2_kernels() noexcept;
#endif

const KernelTable* avx2_table() noexcept {
#if KACOV_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* forced = std::getenv("KACOV_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return table;
}

}  // namespace kacov::simd
