#include <cstdlib>
#include <string_view>

#include "spinsense/kernels/reflection_kernel.hpp"

namespace spinsense::kernels {

namespace {

constexpr KernelTable kScalar{Backend::Scalar, "scalar", &detail::evaluate_row_scalar,
                              &detail::l1_row_scalar};

#if defined(SPINSENSE_HAVE_AVX2_KERNEL)
constexpr KernelTable kAvx2{Backend::Avx2, "avx2", &detail::evaluate_row_avx2,
                            &detail::l1_row_avx2};

bool cpu_has_avx2() {
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
}
#endif

}  // namespace

const KernelTable* kernels_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &kScalar;
    case Backend::Avx2:
#if defined(SPINSENSE_HAVE_AVX2_KERNEL)
      return cpu_has_avx2() ? &kAvx2 : nullptr;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("SPINSENSE_KERNEL");
    if (env != nullptr && std::string_view(env) == "scalar") return &kScalar;
    if (const KernelTable* t = kernels_for(Backend::Avx2)) return t;
    return &kScalar;
  }();
  return *chosen;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (kernels_for(Backend::Avx2) != nullptr) out.push_back(Backend::Avx2);
  return out;
}

}  // namespace spinsense::kernels
