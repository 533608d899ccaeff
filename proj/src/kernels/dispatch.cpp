#include <cstdlib>
#include <string_view>

#include "wdmix/kernels.hpp"

namespace wdmix::kernels {

#ifndef WDMIX_HAVE_AVX2
const KernelTable* avx2_kernels() noexcept { return nullptr; }
#endif

bool cpu_supports_avx2() noexcept {
#if defined(WDMIX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() noexcept {
  const char* env = std::getenv("WDMIX_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
  if (const KernelTable* t = avx2_kernels(); t != nullptr && cpu_supports_avx2()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace wdmix::kernels
