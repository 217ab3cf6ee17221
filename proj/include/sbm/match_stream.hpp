#pragma once

// Stream-architecture block matching: one differential image per search
// offset, a summed-area sliding block over it, offset-sharded workers and a
// bounded pick-N-best stage that realigns per-offset sums into per-reference
// candidate lists.

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sbm/imaging.hpp"
#include "sbm/match_types.hpp"
#include "sbm/simd/kernels.hpp"

namespace sbm {

/// Half-plane search offset: dr > 0, or dr == 0 and dc > 0.
struct Offset {
  int dr = 0;
  int dc = 0;
  auto operator<=>(const Offset&) const = default;
};

/// Row-major half-plane enumeration for half-window hw: (0,1..hw), then
/// (dr, -hw..hw) for dr = 1..hw. Covers every unordered block pair once.
std::vector<Offset> half_plane_offsets(int hw);

/// Base top-lefts valid for every half-plane offset:
/// rows [0, H-hw-k], cols [hw, W-hw-k]. Requires W > 2hw+k and H > hw+k.
Rect overlap_region(int width, int height, int hw, int k);

/// Pixels p of the frame whose partner p + offset is also in frame.
Rect offset_pixel_region(int width, int height, Offset offset);

/// Differential image generator for one offset: emits
/// d(r, c) = (img(r, c) - img(r + dr, c + dc))^2 row by row over region.
class DiffStream {
 public:
  DiffStream(const Gray8& img, Offset offset, const Rect& region,
             const simd::Kernels& kernels = simd::active());

  int rows() const { return region_.rows(); }
  int cols() const { return region_.cols(); }
  int rows_emitted() const { return next_row_; }

  /// Writes the next row into out (size cols()); false once exhausted.
  bool next_row(std::span<std::uint32_t> out);

 private:
  const Gray8& img_;
  Offset offset_;
  Rect region_;
  const simd::Kernels& kernels_;
  int next_row_ = 0;
};

/// Whole differential image, row-major over region.
std::vector<std::uint32_t> diff_stream(const Gray8& img, Offset offset, const Rect& region);

/// Sliding compute block state: a ring of the last k+1 differential rows and a
/// single row of sums. Out-of-range terms of the recurrence are zero, so row i
/// of the output holds zero-padded block sums ending at (i, j); entries with
/// i, j >= k-1 are full k x k sums.
class SlidingBlockSum {
 public:
  SlidingBlockSum(int cols, int k, const simd::Kernels& kernels = simd::active());

  /// Slot to fill with the next differential row, then call commit().
  std::span<std::uint32_t> input_slot();
  /// Advances the recurrence; returns S(row, .) for every column.
  std::span<const std::uint32_t> commit();
  std::span<const std::uint32_t> push_row(std::span<const std::uint32_t> diffs);

  int rows_consumed() const { return rows_; }
  int cols() const { return cols_; }
  int block() const { return k_; }

  /// Diff ring plus sum row; never exceeds (k+1)*cols + cols.
  std::size_t buffered_elements() const { return ring_.size() + sums_.size(); }

 private:
  int cols_;
  int k_;
  const simd::Kernels& kernels_;
  int rows_ = 0;
  std::vector<std::uint32_t> ring_;
  std::vector<std::uint32_t> sums_;
};

/// Un-normalized block SSDs for one offset, indexed by base top-left. Dense
/// tables cover every base of base_region; strided ones keep a sub-grid.
struct SumTable {
  Offset offset;
  Rect base_region;         // bounding rectangle of the retained bases
  std::vector<int> rows;    // retained base rows, ascending
  std::vector<int> cols;    // retained base cols, ascending
  std::vector<std::uint32_t> sums;  // rows.size() x cols.size(), row-major

  bool valid(Coord base) const;
  /// Precondition: valid(base).
  std::uint32_t at(Coord base) const;
  std::size_t size() const { return sums.size(); }
};

/// Runs the recurrence over a row-major differential stream covering region
/// (the pixel rectangle) and keeps only full-block sums, indexed by base
/// top-left. Throws InvalidArgument if diffs.size() != region area.
SumTable sliding_block_sum(std::span<const std::uint32_t> diffs, const Rect& region, int k,
                           Offset offset = {});

/// Every recurrence output including warm-up positions, row-major over region.
std::vector<std::uint32_t> sliding_block_sum_raw(std::span<const std::uint32_t> diffs,
                                                 const Rect& region, int k);

/// diff_stream + sliding_block_sum over offset_pixel_region.
SumTable compute_sum_table(const Gray8& img, Offset offset, int k);

/// Offset groups executed as one pass each: n_workers consecutive offsets of
/// the half-plane enumeration, continuing onto the next window row.
using WorkerGroup = std::vector<Offset>;
std::vector<WorkerGroup> plan_workers(const MatchParams& params);

/// Bases on the stride grid of base_region (edge-snapped) only.
SumTable stride_filter(const SumTable& table, int stride);

/// Bounded per-reference selection of the N best candidates.
class PickNBest {
 public:
  PickNBest(int width, int height, const MatchParams& params, ReferenceGrid grid);

  /// Valid sums for bases (base_row, base_col0 + j) with this offset. Feeds
  /// each reference b on the grid both as (b, b + offset) when b is a listed
  /// base and as (b, b - offset) when b - offset is one.
  void insert_row(Offset offset, int base_row, int base_col0,
                  std::span<const std::uint32_t> sums);

  /// Forward role only: reference b == base, candidate b + offset.
  void insert_forward(Offset offset, Coord base, std::uint32_t ssd);
  /// Mirrored role only: reference b == base + offset, candidate base.
  void insert_mirrored(Offset offset, Coord base, std::uint32_t ssd);

  /// Union of both accumulators' candidates (order independent).
  void merge(const PickNBest& other);

  /// Lists sorted by MatchOrder with the self match first.
  MatchTable finish() const;

  const ReferenceGrid& grid() const { return grid_; }

 private:
  struct Slot {
    std::uint32_t ssd;
    std::int16_t dr;
    std::int16_t dc;
  };
  void insert(int ref_row_idx, int ref_col_idx, Slot s);

  int width_;
  int height_;
  MatchParams params_;
  ReferenceGrid grid_;
  std::vector<int> row_index_;  // frame row -> grid row index or -1
  std::vector<int> col_index_;
  std::size_t capacity_;        // N - 1 non-self slots
  std::vector<Slot> heap_;
  std::vector<std::uint16_t> fill_;
};

/// Materialized pick-N over precomputed tables: for each grid reference b and
/// each table, the forward pair reads the sum at b and the mirrored pair the
/// sum at b - offset. Throws Error if the tables miss a half-plane offset.
MatchTable pick_n_best(std::span<const SumTable> tables, const MatchParams& params, int width,
                       int height, const ReferenceGrid& grid);

struct StreamStats {
  std::size_t offsets = 0;
  std::size_t groups = 0;
  std::size_t sums_emitted = 0;
  std::size_t peak_buffered_elements = 0;  // per worker
  int max_region_cols = 0;
};

struct StreamOptions {
  /// Permutation of plan_workers() groups; empty runs them in plan order.
  std::vector<std::size_t> group_order;
  /// Kernel table override; null uses simd::active().
  const simd::Kernels* kernels = nullptr;
  /// Sees every row of valid sums before pick-N and may modify it. Called
  /// concurrently from worker threads.
  std::function<void(Offset, int base_row, int base_col0, std::span<std::uint32_t>)> on_sums;
  StreamStats* stats = nullptr;
};

/// Stream engine over the overlap region's stride grid. Input must be
/// 8-bit valued; params.lambda2d pre-thresholds pixels as in the oracle.
MatchTable find_matches_stream(const ImagePlane& img, const MatchParams& params,
                               const StreamOptions& options = {});
/// Explicit reference grid; any in-frame reference is exact because each
/// offset streams its own valid rectangle.
MatchTable find_matches_stream(const ImagePlane& img, const MatchParams& params,
                               const ReferenceGrid& grid, const StreamOptions& options = {});

}  // namespace sbm
