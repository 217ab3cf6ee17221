#pragma once

#include <span>

#include "sbm/imaging.hpp"
#include "sbm/match_types.hpp"
#include "sbm/patch_stack.hpp"

namespace sbm {

/// ||g(P) - g(Q)||^2 / k^2 over the k x k blocks at top-lefts p and q, where g
/// zeroes pixels whose magnitude is below lambda2d * sigma (identity at 0).
double patch_distance(const ImagePlane& img, Coord p, Coord q, int k, double lambda2d,
                      double sigma);

/// Brute-force block-wise matching. For every reference on the grid, examines
/// every in-frame candidate within +/- wS/2, keeps those with dist <= tau and
/// retains the N best under MatchOrder. The self match is always present.
///
/// 8-bit-valued planes are matched in exact integer arithmetic; other planes in
/// double precision. The default grid is stride_grid(block_positions(...)).
MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params);
MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params,
                              const ReferenceGrid& grid);
MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params,
                              std::span<const Coord> refs);

/// Stacks the listed patches in list order, truncated to a power-of-two depth.
PatchStack gather_stack(const ImagePlane& img, const MatchTable& table, Coord ref);

/// Pixel pre-threshold applied before distances: v -> 0 when |v| < lambda2d*sigma.
Gray8 prethreshold(const Gray8& img, double lambda2d, double sigma);

}  // namespace sbm
