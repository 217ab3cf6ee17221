#include "sbm/match_types.hpp"

#include <cmath>
#include <string>

#include "sbm/error.hpp"

namespace sbm {

void MatchParams::validate() const {
  if (block_size < 2) throw InvalidArgument("block size must be >= 2");
  if (window_size < 0 || window_size % 2 != 0) {
    throw InvalidArgument("window size must be even, got " + std::to_string(window_size));
  }
  if (max_matches < 1) throw InvalidArgument("max matches must be >= 1");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (stride > block_size) {
    throw InvalidArgument("stride " + std::to_string(stride) + " exceeds block size " +
                          std::to_string(block_size) + " (pixels would go uncovered)");
  }
  if (n_workers < 1) throw InvalidArgument("worker count must be >= 1");
  if (window_size % n_workers != 0) {
    throw InvalidArgument("window size " + std::to_string(window_size) +
                          " must be a multiple of the worker count " +
                          std::to_string(n_workers));
  }
  if (!(lambda2d >= 0.0)) throw InvalidArgument("lambda2d must be >= 0");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (std::isnan(tau)) throw InvalidArgument("tau must be a number");
}

MatchTable::MatchTable(int width, int height, MatchParams params)
    : width_(width), height_(height), params_(params) {}

void MatchTable::set(Coord ref, List matches) { entries_[ref] = std::move(matches); }

const MatchTable::List& MatchTable::at(Coord ref) const {
  auto it = entries_.find(ref);
  if (it == entries_.end()) {
    throw Error("unknown reference (" + std::to_string(ref.r) + ", " + std::to_string(ref.c) +
                ")");
  }
  return it->second;
}

MatchTable MatchTable::restricted_to(const Rect& region) const {
  MatchTable out(width_, height_, params_);
  for (const auto& [ref, list] : entries_) {
    if (region.contains(ref)) out.entries_.emplace_hint(out.entries_.end(), ref, list);
  }
  return out;
}

void MatchTable::merge(const MatchTable& other) {
  for (const auto& [ref, list] : other.entries_) {
    if (!entries_.emplace(ref, list).second) {
      throw InvalidArgument("merge: duplicate reference (" + std::to_string(ref.r) + ", " +
                            std::to_string(ref.c) + ")");
    }
  }
}

std::vector<int> stride_positions(int first, int last, int stride) {
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  std::vector<int> out;
  if (last < first) return out;
  for (int p = first; p <= last; p += stride) out.push_back(p);
  if (out.back() != last) out.push_back(last);
  return out;
}

ReferenceGrid stride_grid(const Rect& region, int stride) {
  return {stride_positions(region.row0, region.row1, stride),
          stride_positions(region.col0, region.col1, stride)};
}

Rect block_positions(int width, int height, int k) {
  return {0, height - k, 0, width - k};
}

}  // namespace sbm
