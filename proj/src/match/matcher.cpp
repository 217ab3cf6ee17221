#include "sbm/matcher.hpp"

#include <string>

#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/match_stream.hpp"

namespace sbm {

MatchBackend parse_backend(std::string_view name) {
  if (name == "oracle") return MatchBackend::oracle;
  if (name == "stream") return MatchBackend::stream;
  throw InvalidArgument("unknown matcher backend '" + std::string(name) + "'");
}

std::string_view backend_name(MatchBackend backend) {
  return backend == MatchBackend::oracle ? "oracle" : "stream";
}

MatchTable match_blocks(const ImagePlane& img, const MatchParams& params, MatchBackend backend) {
  params.validate();
  // Same frame contract for both engines, even though the stream engine alone
  // could handle smaller frames.
  const int min_side = params.window_size + params.block_size;
  if (img.width() < min_side || img.height() < min_side) {
    throw InvalidArgument("image " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " smaller than window + block (" +
                          std::to_string(min_side) + ")");
  }
  const auto grid =
      stride_grid(block_positions(img.width(), img.height(), params.block_size), params.stride);
  if (backend == MatchBackend::oracle) return find_matches_block(img, params, grid);
  return find_matches_stream(img, params, grid);
}

}  // namespace sbm
