#include "sbm/perf_model.hpp"

#include <string>

#include "sbm/error.hpp"

namespace sbm {

void HwConfig::validate() const {
  if (!(clock_hz > 0.0)) throw InvalidArgument("clock must be positive");
  if (n_channels < 1) throw InvalidArgument("channel count must be >= 1");
  if (width < 1 || height < 1) throw InvalidArgument("frame size must be positive");
  if (block_size < 1) throw InvalidArgument("block size must be >= 1");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (window_size < 2 || window_size % 2 != 0) {
    throw InvalidArgument("window size must be even and >= 2");
  }
  if (window_size % n_channels != 0) {
    throw InvalidArgument("window size " + std::to_string(window_size) +
                          " must be a multiple of the channel count " +
                          std::to_string(n_channels));
  }
}

std::int64_t match_passes(const HwConfig& cfg) {
  cfg.validate();
  const std::int64_t offsets = static_cast<std::int64_t>(cfg.window_size) * cfg.window_size / 2;
  return (offsets + cfg.n_channels - 1) / cfg.n_channels;
}

double estimate_match_time(const HwConfig& cfg) {
  const double pixels = static_cast<double>(cfg.width) * static_cast<double>(cfg.height);
  return static_cast<double>(match_passes(cfg)) * pixels / cfg.clock_hz;
}

BufferEstimate estimate_buffers(const HwConfig& cfg) {
  cfg.validate();
  BufferEstimate e{};
  e.pixel_elements = static_cast<std::int64_t>(cfg.window_size) * cfg.width / 2;
  e.diff_elements = static_cast<std::int64_t>(cfg.block_size) * cfg.width;
  e.sum_elements = cfg.width;
  e.bytes = e.pixel_elements + 4 * (e.diff_elements + e.sum_elements);
  constexpr std::int64_t kBramBits = 18 * 1024;
  e.bram18_slots = (8 * e.bytes + kBramBits - 1) / kBramBits;
  return e;
}

}  // namespace sbm
