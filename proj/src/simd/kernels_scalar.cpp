#include "sbm/simd/kernels.hpp"

namespace sbm::simd {

namespace {

void sqdiff_row(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t d = static_cast<std::int32_t>(a[i]) - static_cast<std::int32_t>(b[i]);
    out[i] = static_cast<std::uint32_t>(d * d);
  }
}

// Literal eight-term stencil:
//   S(r,c) = S(r-1,c) + S(r,c-1) - S(r-1,c-1)
//          + d(r,c) - d(r-k,c) - d(r,c-k) + d(r-k,c-k)
// with every term outside the streamed area valued zero.
void block_sum_row(const std::uint32_t* cur, const std::uint32_t* old, std::uint32_t* sums,
                   std::size_t n, std::size_t k) {
  std::uint32_t left = 0;     // S(r, c-1)
  std::uint32_t up_left = 0;  // S(r-1, c-1)
  for (std::size_t c = 0; c < n; ++c) {
    const std::uint32_t up = sums[c];
    std::uint32_t v = up + left - up_left + cur[c];
    if (old) v -= old[c];
    if (c >= k) {
      v -= cur[c - k];
      if (old) v += old[c - k];
    }
    up_left = up;
    left = v;
    sums[c] = v;
  }
}

std::uint32_t block_ssd(const std::uint8_t* a, const std::uint8_t* b, std::ptrdiff_t stride,
                        std::size_t k) {
  std::uint32_t total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint8_t* ra = a + static_cast<std::ptrdiff_t>(i) * stride;
    const std::uint8_t* rb = b + static_cast<std::ptrdiff_t>(i) * stride;
    for (std::size_t j = 0; j < k; ++j) {
      const std::int32_t d = static_cast<std::int32_t>(ra[j]) - static_cast<std::int32_t>(rb[j]);
      total += static_cast<std::uint32_t>(d * d);
    }
  }
  return total;
}

}  // namespace

const Kernels& scalar_kernels() {
  static constexpr Kernels k{Isa::scalar, sqdiff_row, block_sum_row, block_ssd};
  return k;
}

}  // namespace sbm::simd
