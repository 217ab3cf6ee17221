#include <string>

#include "sbm/error.hpp"
#include "sbm/match_stream.hpp"

namespace sbm {

std::vector<Offset> half_plane_offsets(int hw) {
  if (hw < 0) throw InvalidArgument("half window must be >= 0");
  std::vector<Offset> out;
  out.reserve(static_cast<std::size_t>(hw + hw * (2 * hw + 1)));
  for (int dc = 1; dc <= hw; ++dc) out.push_back({0, dc});
  for (int dr = 1; dr <= hw; ++dr) {
    for (int dc = -hw; dc <= hw; ++dc) out.push_back({dr, dc});
  }
  return out;
}

std::vector<WorkerGroup> plan_workers(const MatchParams& params) {
  if (params.n_workers < 1) throw InvalidArgument("worker count must be >= 1");
  if (params.window_size % params.n_workers != 0) {
    throw InvalidArgument("window size " + std::to_string(params.window_size) +
                          " must be a multiple of the worker count " +
                          std::to_string(params.n_workers));
  }
  const auto offsets = half_plane_offsets(params.half_window());
  const auto width = static_cast<std::size_t>(params.n_workers);
  std::vector<WorkerGroup> groups;
  groups.reserve((offsets.size() + width - 1) / width);
  for (std::size_t i = 0; i < offsets.size(); i += width) {
    const std::size_t end = std::min(offsets.size(), i + width);
    groups.emplace_back(offsets.begin() + static_cast<std::ptrdiff_t>(i),
                        offsets.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return groups;
}

}  // namespace sbm
