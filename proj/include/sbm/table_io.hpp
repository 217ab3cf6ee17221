#pragma once

#include <filesystem>
#include <iosfwd>

#include "sbm/match_stream.hpp"
#include "sbm/match_types.hpp"

namespace sbm {

// BMT1 text layout:
//   BMT1 <width> <height> <k> <wS> <N> <stride>
//   R <r> <c> <m>              one block per reference, row-major
//   M <dr> <dc> <dist>         m lines, dist with 6 decimals
void write_bmt1(std::ostream& out, const MatchTable& table);
void write_bmt1(const std::filesystem::path& path, const MatchTable& table);
MatchTable read_bmt1(std::istream& in);
MatchTable read_bmt1(const std::filesystem::path& path);

// SUM1 binary debug dump, little-endian: "SUM1", then int32 width, height
// (retained columns / rows), k, dr, dc; then width*height uint32 sums.
void write_sum1(std::ostream& out, const SumTable& table, int k);
void write_sum1(const std::filesystem::path& path, const SumTable& table, int k);

}  // namespace sbm
