#include <cstdlib>
#include <string_view>

#include "drivestat/simd/kernels.hpp"

namespace drivestat::simd {

#ifdef DRIVESTAT_HAVE_AVX2
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_kernels() {
#ifdef DRIVESTAT_HAVE_AVX2
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (supported) return &avx2::table();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& selected = []() -> const KernelTable& {
    const char* forced = std::getenv("DRIVESTAT_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return selected;
}

}  // namespace drivestat::simd
