#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace sbm {

struct Coord {
  int r = 0;
  int c = 0;
  auto operator<=>(const Coord&) const = default;
};

/// Inclusive rectangle of positions.
struct Rect {
  int row0 = 0;
  int row1 = -1;
  int col0 = 0;
  int col1 = -1;

  int rows() const { return row1 - row0 + 1; }
  int cols() const { return col1 - col0 + 1; }
  bool empty() const { return row1 < row0 || col1 < col0; }
  bool contains(Coord p) const {
    return p.r >= row0 && p.r <= row1 && p.c >= col0 && p.c <= col1;
  }
  bool operator==(const Rect&) const = default;
};

/// Block-matching tunables.
struct MatchParams {
  int block_size = 8;        // k
  int window_size = 32;      // wS; candidates lie within +/- wS/2
  int max_matches = 16;      // N, self-match included
  double tau = std::numeric_limits<double>::infinity();
  double lambda2d = 0.0;     // pixel pre-threshold multiplier, 0 disables
  double sigma = 0.0;
  int stride = 1;
  int n_workers = 1;

  int half_window() const { return window_size / 2; }

  /// Throws InvalidArgument on any violated invariant.
  void validate() const;
};

struct MatchEntry {
  int dr = 0;
  int dc = 0;
  double dist = 0.0;

  bool is_self() const { return dr == 0 && dc == 0; }
  bool operator==(const MatchEntry&) const = default;
};

/// Total order of a match list: self first, then (dist, dr, dc).
struct MatchOrder {
  bool operator()(const MatchEntry& a, const MatchEntry& b) const {
    if (a.is_self() != b.is_self()) return a.is_self();
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.dr != b.dr) return a.dr < b.dr;
    return a.dc < b.dc;
  }
};

/// Per-reference ordered candidate lists, keyed by reference top-left.
class MatchTable {
 public:
  using List = std::vector<MatchEntry>;

  MatchTable() = default;
  MatchTable(int width, int height, MatchParams params);

  int width() const { return width_; }
  int height() const { return height_; }
  const MatchParams& params() const { return params_; }

  void set(Coord ref, List matches);
  bool contains(Coord ref) const { return entries_.count(ref) != 0; }
  /// Throws Error("unknown reference ...") when absent.
  const List& at(Coord ref) const;
  const std::map<Coord, List>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// References inside region only.
  MatchTable restricted_to(const Rect& region) const;

  /// Adds every reference of other (which must not overlap this table's set).
  void merge(const MatchTable& other);

  bool operator==(const MatchTable& other) const {
    return width_ == other.width_ && height_ == other.height_ && entries_ == other.entries_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  MatchParams params_;
  std::map<Coord, List> entries_;
};

/// Reference positions: every combination of rows x cols.
struct ReferenceGrid {
  std::vector<int> rows;
  std::vector<int> cols;

  std::size_t size() const { return rows.size() * cols.size(); }
};

/// first, first+stride, ... with last appended when the progression misses it.
std::vector<int> stride_positions(int first, int last, int stride);

/// Stride grid over region, snapped to include its last row and column.
ReferenceGrid stride_grid(const Rect& region, int stride);

/// Valid top-left block positions of a width x height frame.
Rect block_positions(int width, int height, int k);

/// Normalized distance of an integer block SSD.
inline double normalized_distance(std::uint64_t ssd, int k) {
  return static_cast<double>(ssd) / (static_cast<double>(k) * static_cast<double>(k));
}

}  // namespace sbm
