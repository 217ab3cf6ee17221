#pragma once

#include <string_view>

#include "sbm/imaging.hpp"
#include "sbm/match_types.hpp"

namespace sbm {

enum class MatchBackend { oracle, stream };

MatchBackend parse_backend(std::string_view name);
std::string_view backend_name(MatchBackend backend);

/// Full-frame stride-grid match table from the chosen engine. Both backends
/// return identical tables for 8-bit-valued input. Frames must be at least
/// wS + k pixels on each side.
MatchTable match_blocks(const ImagePlane& img, const MatchParams& params, MatchBackend backend);

}  // namespace sbm
