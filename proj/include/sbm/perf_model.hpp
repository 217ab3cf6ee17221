#pragma once

#include <cstdint>

namespace sbm {

/// Streamed block-matching hardware configuration.
struct HwConfig {
  double clock_hz = 250e6;
  int n_channels = 16;
  int width = 1280;
  int height = 720;
  int window_size = 32;
  int block_size = 8;
  int stride = 1;

  void validate() const;
};

/// passes = ceil((wS^2 / 2) / channels); one pixel per clock per channel.
std::int64_t match_passes(const HwConfig& cfg);
double estimate_match_time(const HwConfig& cfg);
inline double estimate_fps(const HwConfig& cfg) { return 1.0 / estimate_match_time(cfg); }

struct BufferEstimate {
  std::int64_t pixel_elements;  // wS * width / 2, 1 byte each
  std::int64_t diff_elements;   // k * width, 4 bytes each
  std::int64_t sum_elements;    // width, 4 bytes each
  std::int64_t bytes;           // per worker
  std::int64_t bram18_slots;    // 18 Kib blocks, informative only
};

BufferEstimate estimate_buffers(const HwConfig& cfg);
inline std::int64_t estimate_buffer_bytes(const HwConfig& cfg) {
  return estimate_buffers(cfg).bytes;
}

}  // namespace sbm
