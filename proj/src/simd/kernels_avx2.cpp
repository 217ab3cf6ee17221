// AVX2 variants. Functions carry target attributes so this file builds without
// -mavx2 and nothing here leaks AVX2 code into shared inline instantiations.

#include <immintrin.h>

#include "sbm/simd/kernels.hpp"

#define SBM_AVX2 __attribute__((target("avx2")))

namespace sbm::simd {

namespace {

SBM_AVX2 void sqdiff_row(const std::uint8_t* a, const std::uint8_t* b, std::uint32_t* out,
                         std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i va = _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(a + i)));
    const __m256i vb = _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(b + i)));
    const __m256i d = _mm256_sub_epi32(va, vb);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_mullo_epi32(d, d));
  }
  for (; i < n; ++i) {
    const std::int32_t d = static_cast<std::int32_t>(a[i]) - static_cast<std::int32_t>(b[i]);
    out[i] = static_cast<std::uint32_t>(d * d);
  }
}

// Separable form of the stencil: S(r,c) - S(r-1,c) is the k-wide horizontal
// window sum of e(j) = d(r,j) - d(r-k,j), which vectorizes across c.
SBM_AVX2 void block_sum_row(const std::uint32_t* cur, const std::uint32_t* old,
                            std::uint32_t* sums, std::size_t n, std::size_t k) {
  auto e = [&](std::size_t j) -> std::uint32_t { return old ? cur[j] - old[j] : cur[j]; };
  const std::size_t head = k - 1 < n ? k - 1 : n;
  std::uint32_t window = 0;
  for (std::size_t c = 0; c < head; ++c) {
    window += e(c);
    sums[c] += window;
  }
  std::size_t c = head;
  for (; c + 8 <= n; c += 8) {
    __m256i acc = _mm256_setzero_si256();
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j = c - t;
      __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cur + j));
      if (old) v = _mm256_sub_epi32(v, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(old + j)));
      acc = _mm256_add_epi32(acc, v);
    }
    __m256i* dst = reinterpret_cast<__m256i*>(sums + c);
    _mm256_storeu_si256(dst, _mm256_add_epi32(_mm256_loadu_si256(dst), acc));
  }
  for (; c < n; ++c) {
    std::uint32_t w = 0;
    for (std::size_t t = 0; t < k; ++t) w += e(c - t);
    sums[c] += w;
  }
}

SBM_AVX2 std::uint32_t block_ssd(const std::uint8_t* a, const std::uint8_t* b,
                                 std::ptrdiff_t stride, std::size_t k) {
  __m256i acc = _mm256_setzero_si256();
  std::uint32_t tail = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint8_t* ra = a + static_cast<std::ptrdiff_t>(i) * stride;
    const std::uint8_t* rb = b + static_cast<std::ptrdiff_t>(i) * stride;
    std::size_t j = 0;
    for (; j + 16 <= k; j += 16) {
      const __m256i va = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(ra + j)));
      const __m256i vb = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(rb + j)));
      const __m256i d = _mm256_sub_epi16(va, vb);
      acc = _mm256_add_epi32(acc, _mm256_madd_epi16(d, d));
    }
    for (; j + 8 <= k; j += 8) {
      const __m128i va = _mm_cvtepu8_epi16(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(ra + j)));
      const __m128i vb = _mm_cvtepu8_epi16(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(rb + j)));
      const __m128i d = _mm_sub_epi16(va, vb);
      acc = _mm256_add_epi32(acc, _mm256_zextsi128_si256(_mm_madd_epi16(d, d)));
    }
    for (; j < k; ++j) {
      const std::int32_t d = static_cast<std::int32_t>(ra[j]) - static_cast<std::int32_t>(rb[j]);
      tail += static_cast<std::uint32_t>(d * d);
    }
  }
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint32_t total = tail;
  for (std::uint32_t v : lanes) total += v;
  return total;
}

}  // namespace

const Kernels& avx2_kernels() {
  static constexpr Kernels k{Isa::avx2, sqdiff_row, block_sum_row, block_ssd};
  return k;
}

}  // namespace sbm::simd
