#pragma once

// Data-parallel inner loops of the matching engines. Every kernel has a scalar
// reference implementation; vector variants must produce bit-identical output.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace sbm::simd {

enum class Isa { scalar, avx2, neon };

struct Kernels {
  Isa isa;

  // out[i] = (a[i] - b[i])^2
  void (*sqdiff_row)(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t* out,
                     std::size_t n);

  // Advances one row of the zero-padded k x k summed-area recurrence in place.
  // On entry sums holds S(r-1, .) (all zero for the first row); cur is d(r, .),
  // old is d(r-k, .) or nullptr while r < k. On exit sums holds S(r, .).
  // Arithmetic is modulo 2^32; results are exact while block sums fit 32 bits.
  void (*block_sum_row)(const std::uint32_t* cur, const std::uint32_t* old,
                        std::uint32_t* sums, std::size_t n, std::size_t k);

  // Sum of squared differences of two k x k blocks sharing a row stride.
  std::uint32_t (*block_ssd)(const std::uint8_t* a, const std::uint8_t* b,
                             std::ptrdiff_t stride, std::size_t k);
};

const Kernels& scalar_kernels();
#if defined(SBM_HAVE_AVX2)
const Kernels& avx2_kernels();
#endif
#if defined(SBM_HAVE_NEON)
const Kernels& neon_kernels();
#endif

/// Compiled in and supported by the running CPU.
bool isa_available(Isa isa);

/// Kernel table for a specific ISA; throws InvalidArgument if unavailable.
const Kernels& kernels_for(Isa isa);

/// Best available ISA unless overridden by select() or SBM_SIMD=scalar|avx2|neon.
const Kernels& active();

void select(Isa isa);

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

}  // namespace sbm::simd
