#include <arm_neon.h>

#include "sbm/simd/kernels.hpp"

namespace sbm::simd {

namespace {

void sqdiff_row(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t* out,
                std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const uint8x8_t d = vabd_u8(vld1_u8(a + i), vld1_u8(b + i));
    const uint16x8_t sq = vmull_u8(d, d);  // 255^2 fits 16 bits
    vst1q_u32(out + i, vmovl_u16(vget_low_u16(sq)));
    vst1q_u32(out + i + 4, vmovl_u16(vget_high_u16(sq)));
  }
  for (; i < n; ++i) {
    const std::int32_t d = static_cast<std::int32_t>(a[i]) - static_cast<std::int32_t>(b[i]);
    out[i] = static_cast<std::uint32_t>(d * d);
  }
}

// Same separable form as the AVX2 variant.
void block_sum_row(const std::uint32_t* cur, const std::uint32_t* old, std::uint32_t* sums,
                   std::size_t n, std::size_t k) {
  auto e = [&](std::size_t j) -> std::uint32_t { return old ? cur[j] - old[j] : cur[j]; };
  const std::size_t head = k - 1 < n ? k - 1 : n;
  std::uint32_t window = 0;
  for (std::size_t c = 0; c < head; ++c) {
    window += e(c);
    sums[c] += window;
  }
  std::size_t c = head;
  for (; c + 4 <= n; c += 4) {
    uint32x4_t acc = vdupq_n_u32(0);
    for (std::size_t t = 0; t < k; ++t) {
      uint32x4_t v = vld1q_u32(cur + c - t);
      if (old) v = vsubq_u32(v, vld1q_u32(old + c - t));
      acc = vaddq_u32(acc, v);
    }
    vst1q_u32(sums + c, vaddq_u32(vld1q_u32(sums + c), acc));
  }
  for (; c < n; ++c) {
    std::uint32_t w = 0;
    for (std::size_t t = 0; t < k; ++t) w += e(c - t);
    sums[c] += w;
  }
}

std::uint32_t block_ssd(const std::uint8_t* a, const std::uint8_t* b, std::ptrdiff_t stride,
                        std::size_t k) {
  uint32x4_t acc = vdupq_n_u32(0);
  std::uint32_t tail = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint8_t* ra = a + static_cast<std::ptrdiff_t>(i) * stride;
    const std::uint8_t* rb = b + static_cast<std::ptrdiff_t>(i) * stride;
    std::size_t j = 0;
    for (; j + 8 <= k; j += 8) {
      const uint8x8_t d = vabd_u8(vld1_u8(ra + j), vld1_u8(rb + j));
      acc = vpadalq_u16(acc, vmull_u8(d, d));
    }
    for (; j < k; ++j) {
      const std::int32_t d = static_cast<std::int32_t>(ra[j]) - static_cast<std::int32_t>(rb[j]);
      tail += static_cast<std::uint32_t>(d * d);
    }
  }
  return tail + vaddvq_u32(acc);
}

}  // namespace

const Kernels& neon_kernels() {
  static constexpr Kernels k{Isa::neon, sqdiff_row, block_sum_row, block_ssd};
  return k;
}

}  // namespace sbm::simd
