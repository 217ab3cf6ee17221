#include <atomic>
#include <cstdlib>
#include <string>

#include "sbm/error.hpp"
#include "sbm/simd/kernels.hpp"

namespace sbm::simd {

namespace {

bool cpu_has_avx2() {
#if defined(SBM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa best_isa() {
  if (const char* env = std::getenv("SBM_SIMD"); env && *env) {
    const Isa requested = parse_isa(env);
    if (isa_available(requested)) return requested;
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

std::atomic<const Kernels*>& current() {
  static std::atomic<const Kernels*> table{&kernels_for(best_isa())};
  return table;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
    case Isa::neon:
#if defined(SBM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidArgument("SIMD level '" + std::string(isa_name(isa)) +
                          "' is not available on this machine");
  }
  switch (isa) {
#if defined(SBM_HAVE_AVX2)
    case Isa::avx2:
      return avx2_kernels();
#endif
#if defined(SBM_HAVE_NEON)
    case Isa::neon:
      return neon_kernels();
#endif
    default:
      return scalar_kernels();
  }
}

const Kernels& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&kernels_for(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  throw InvalidArgument("unknown SIMD level '" + std::string(name) + "'");
}

}  // namespace sbm::simd
