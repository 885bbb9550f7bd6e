#include <cstdlib>
#include <cstring>

#include "familiar/kernels/nearest.hpp"

namespace familiar::kernels {

#if defined(FAMILIAR_HAVE_AVX2)
NearestResult nearest_avx2(std::span<const double>, std::span<const double>, double, double);
#endif
#if defined(FAMILIAR_HAVE_NEON)
NearestResult nearest_neon(std::span<const double>, std::span<const double>, double, double);
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(FAMILIAR_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(FAMILIAR_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

NearestFn nearest_kernel(Isa isa) {
  if (!isa_available(isa)) return &nearest_scalar;
  switch (isa) {
#if defined(FAMILIAR_HAVE_AVX2)
    case Isa::Avx2: return &nearest_avx2;
#endif
#if defined(FAMILIAR_HAVE_NEON)
    case Isa::Neon: return &nearest_neon;
#endif
    default: return &nearest_scalar;
  }
}

Isa selected_isa() {
  static const Isa isa = [] {
    const char* force = std::getenv("FAMILIAR_FORCE_SCALAR");
    if (force && std::strcmp(force, "1") == 0) return Isa::Scalar;
    if (isa_available(Isa::Avx2)) return Isa::Avx2;
    if (isa_available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
  }();
  return isa;
}

}  // namespace familiar::kernels
