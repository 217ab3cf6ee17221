#include <algorithm>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <string>

#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/match_stream.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

namespace {

constexpr int kMaxStreamBlock = 256;  // k^2 * 255^2 < 2^32

std::size_t area(const Rect& r) {
  return r.empty() ? 0 : static_cast<std::size_t>(r.rows()) * static_cast<std::size_t>(r.cols());
}

Rect base_region_of(const Rect& pixels, int k) {
  return {pixels.row0, pixels.row1 - k + 1, pixels.col0, pixels.col1 - k + 1};
}

std::vector<int> iota_range(int first, int last) {
  std::vector<int> v;
  if (last >= first) {
    v.resize(static_cast<std::size_t>(last - first + 1));
    std::iota(v.begin(), v.end(), first);
  }
  return v;
}

std::ptrdiff_t position(const std::vector<int>& sorted, int value) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
  if (it == sorted.end() || *it != value) return -1;
  return it - sorted.begin();
}

}  // namespace

Rect overlap_region(int width, int height, int hw, int k) {
  if (hw < 0 || k < 1) throw InvalidArgument("overlap_region: invalid window or block");
  if (width <= 2 * hw + k || height <= hw + k) {
    throw InvalidArgument("image " + std::to_string(width) + "x" + std::to_string(height) +
                          " too small for window half-width " + std::to_string(hw) +
                          " and block " + std::to_string(k));
  }
  return {0, height - hw - k, hw, width - hw - k};
}

Rect offset_pixel_region(int width, int height, Offset o) {
  return {std::max(0, -o.dr), height - 1 - std::max(0, o.dr), std::max(0, -o.dc),
          width - 1 - std::max(0, o.dc)};
}

// --- DiffStream -------------------------------------------------------------

DiffStream::DiffStream(const Gray8& img, Offset offset, const Rect& region,
                       const simd::Kernels& kernels)
    : img_(img), offset_(offset), region_(region), kernels_(kernels) {
  const Rect valid = offset_pixel_region(img.width, img.height, offset);
  if (!region.empty() && !(valid.contains({region.row0, region.col0}) &&
                           valid.contains({region.row1, region.col1}))) {
    throw InvalidArgument("diff_stream: region exceeds the offset's valid pixels");
  }
}

bool DiffStream::next_row(std::span<std::uint32_t> out) {
  if (region_.empty() || next_row_ >= rows()) return false;
  if (out.size() != static_cast<std::size_t>(cols())) {
    throw InvalidArgument("diff_stream: output row has wrong length");
  }
  const int r = region_.row0 + next_row_;
  const std::uint8_t* base = img_.row(r) + region_.col0;
  const std::uint8_t* partner = img_.row(r + offset_.dr) + region_.col0 + offset_.dc;
  kernels_.sqdiff_row(base, partner, out.data(), out.size());
  ++next_row_;
  return true;
}

std::vector<std::uint32_t> diff_stream(const Gray8& img, Offset offset, const Rect& region) {
  DiffStream stream(img, offset, region);
  std::vector<std::uint32_t> out(area(region));
  const auto cols = static_cast<std::size_t>(std::max(0, region.cols()));
  for (std::size_t i = 0; stream.next_row(std::span(out).subspan(i * cols, cols)); ++i) {
  }
  return out;
}

// --- SlidingBlockSum --------------------------------------------------------

SlidingBlockSum::SlidingBlockSum(int cols, int k, const simd::Kernels& kernels)
    : cols_(cols), k_(k), kernels_(kernels) {
  if (cols < 0 || k < 1) throw InvalidArgument("sliding block: invalid shape");
  ring_.assign(static_cast<std::size_t>(k + 1) * static_cast<std::size_t>(cols), 0);
  sums_.assign(static_cast<std::size_t>(cols), 0);
}

std::span<std::uint32_t> SlidingBlockSum::input_slot() {
  const auto slot = static_cast<std::size_t>(rows_ % (k_ + 1));
  return {ring_.data() + slot * static_cast<std::size_t>(cols_), static_cast<std::size_t>(cols_)};
}

std::span<const std::uint32_t> SlidingBlockSum::commit() {
  const auto n = static_cast<std::size_t>(cols_);
  const std::uint32_t* cur = ring_.data() + static_cast<std::size_t>(rows_ % (k_ + 1)) * n;
  const std::uint32_t* old =
      rows_ >= k_ ? ring_.data() + static_cast<std::size_t>((rows_ - k_) % (k_ + 1)) * n : nullptr;
  kernels_.block_sum_row(cur, old, sums_.data(), n, static_cast<std::size_t>(k_));
  ++rows_;
  return sums_;
}

std::span<const std::uint32_t> SlidingBlockSum::push_row(std::span<const std::uint32_t> diffs) {
  if (diffs.size() != static_cast<std::size_t>(cols_)) {
    throw InvalidArgument("sliding block: row length mismatch");
  }
  std::copy(diffs.begin(), diffs.end(), input_slot().begin());
  return commit();
}

// --- SumTable ---------------------------------------------------------------

bool SumTable::valid(Coord base) const {
  if (!base_region.contains(base)) return false;
  return position(rows, base.r) >= 0 && position(cols, base.c) >= 0;
}

std::uint32_t SumTable::at(Coord base) const {
  const bool dense = rows.size() == static_cast<std::size_t>(base_region.rows()) &&
                     cols.size() == static_cast<std::size_t>(base_region.cols());
  const std::size_t i = dense ? static_cast<std::size_t>(base.r - base_region.row0)
                              : static_cast<std::size_t>(position(rows, base.r));
  const std::size_t j = dense ? static_cast<std::size_t>(base.c - base_region.col0)
                              : static_cast<std::size_t>(position(cols, base.c));
  return sums[i * cols.size() + j];
}

std::vector<std::uint32_t> sliding_block_sum_raw(std::span<const std::uint32_t> diffs,
                                                 const Rect& region, int k) {
  if (diffs.size() != area(region)) {
    throw InvalidArgument("sliding_block_sum: stream length " + std::to_string(diffs.size()) +
                          " does not match region area " + std::to_string(area(region)));
  }
  std::vector<std::uint32_t> out(diffs.size());
  if (out.empty()) return out;
  const auto cols = static_cast<std::size_t>(region.cols());
  SlidingBlockSum state(region.cols(), k);
  for (std::size_t i = 0; i < static_cast<std::size_t>(region.rows()); ++i) {
    auto row = state.push_row(diffs.subspan(i * cols, cols));
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  return out;
}

SumTable sliding_block_sum(std::span<const std::uint32_t> diffs, const Rect& region, int k,
                           Offset offset) {
  if (diffs.size() != area(region)) {
    throw InvalidArgument("sliding_block_sum: stream length " + std::to_string(diffs.size()) +
                          " does not match region area " + std::to_string(area(region)));
  }
  SumTable table;
  table.offset = offset;
  table.base_region = base_region_of(region, k);
  if (table.base_region.empty()) return table;
  table.rows = iota_range(table.base_region.row0, table.base_region.row1);
  table.cols = iota_range(table.base_region.col0, table.base_region.col1);
  table.sums.reserve(area(table.base_region));
  const auto cols = static_cast<std::size_t>(region.cols());
  SlidingBlockSum state(region.cols(), k);
  for (std::size_t i = 0; i < static_cast<std::size_t>(region.rows()); ++i) {
    auto row = state.push_row(diffs.subspan(i * cols, cols));
    if (i + 1 >= static_cast<std::size_t>(k)) {
      table.sums.insert(table.sums.end(), row.begin() + (k - 1), row.end());
    }
  }
  return table;
}

SumTable compute_sum_table(const Gray8& img, Offset offset, int k) {
  const Rect pixels = offset_pixel_region(img.width, img.height, offset);
  return sliding_block_sum(diff_stream(img, offset, pixels), pixels, k, offset);
}

SumTable stride_filter(const SumTable& table, int stride) {
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  SumTable out;
  out.offset = table.offset;
  out.base_region = table.base_region;
  if (table.rows.empty() || table.cols.empty()) return out;
  auto pick = [stride](const std::vector<int>& axis) {
    std::vector<int> kept;
    for (int p : stride_positions(axis.front(), axis.back(), stride)) {
      if (std::binary_search(axis.begin(), axis.end(), p)) kept.push_back(p);
    }
    return kept;
  };
  out.rows = pick(table.rows);
  out.cols = pick(table.cols);
  out.sums.reserve(out.rows.size() * out.cols.size());
  for (int r : out.rows) {
    for (int c : out.cols) out.sums.push_back(table.at({r, c}));
  }
  return out;
}

// --- PickNBest --------------------------------------------------------------

PickNBest::PickNBest(int width, int height, const MatchParams& params, ReferenceGrid grid)
    : width_(width), height_(height), params_(params), grid_(std::move(grid)) {
  const int k = params.block_size;
  row_index_.assign(static_cast<std::size_t>(std::max(0, height)), -1);
  col_index_.assign(static_cast<std::size_t>(std::max(0, width)), -1);
  for (std::size_t i = 0; i < grid_.rows.size(); ++i) {
    const int r = grid_.rows[i];
    if (r < 0 || r > height - k) throw InvalidArgument("reference row out of frame");
    row_index_[static_cast<std::size_t>(r)] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < grid_.cols.size(); ++i) {
    const int c = grid_.cols[i];
    if (c < 0 || c > width - k) throw InvalidArgument("reference column out of frame");
    col_index_[static_cast<std::size_t>(c)] = static_cast<int>(i);
  }
  capacity_ = static_cast<std::size_t>(params.max_matches - 1);
  heap_.resize(grid_.size() * capacity_);
  fill_.assign(grid_.size(), 0);
}

void PickNBest::insert(int ri, int ci, Slot s) {
  if (capacity_ == 0) return;
  if (!(normalized_distance(s.ssd, params_.block_size) <= params_.tau)) return;
  auto less = [](const Slot& a, const Slot& b) {
    if (a.ssd != b.ssd) return a.ssd < b.ssd;
    if (a.dr != b.dr) return a.dr < b.dr;
    return a.dc < b.dc;
  };
  const std::size_t idx =
      static_cast<std::size_t>(ri) * grid_.cols.size() + static_cast<std::size_t>(ci);
  Slot* first = heap_.data() + idx * capacity_;
  std::uint16_t& n = fill_[idx];
  if (n < capacity_) {
    first[n] = s;
    std::push_heap(first, first + n + 1, less);
    ++n;
  } else if (less(s, first[0])) {
    std::pop_heap(first, first + capacity_, less);
    first[capacity_ - 1] = s;
    std::push_heap(first, first + capacity_, less);
  }
}

void PickNBest::insert_forward(Offset o, Coord base, std::uint32_t ssd) {
  if (base.r < 0 || base.r >= height_ || base.c < 0 || base.c >= width_) return;
  const int ri = row_index_[static_cast<std::size_t>(base.r)];
  const int ci = col_index_[static_cast<std::size_t>(base.c)];
  if (ri >= 0 && ci >= 0) {
    insert(ri, ci, {ssd, static_cast<std::int16_t>(o.dr), static_cast<std::int16_t>(o.dc)});
  }
}

void PickNBest::insert_mirrored(Offset o, Coord base, std::uint32_t ssd) {
  const Coord ref{base.r + o.dr, base.c + o.dc};
  if (ref.r < 0 || ref.r >= height_ || ref.c < 0 || ref.c >= width_) return;
  const int ri = row_index_[static_cast<std::size_t>(ref.r)];
  const int ci = col_index_[static_cast<std::size_t>(ref.c)];
  if (ri >= 0 && ci >= 0) {
    insert(ri, ci, {ssd, static_cast<std::int16_t>(-o.dr), static_cast<std::int16_t>(-o.dc)});
  }
}

void PickNBest::insert_row(Offset o, int base_row, int base_col0,
                           std::span<const std::uint32_t> sums) {
  const int n = static_cast<int>(sums.size());
  const auto fwd_row = static_cast<std::size_t>(base_row);
  if (base_row >= 0 && base_row < height_ && row_index_[fwd_row] >= 0) {
    const int ri = row_index_[fwd_row];
    const auto dr = static_cast<std::int16_t>(o.dr);
    const auto dc = static_cast<std::int16_t>(o.dc);
    for (std::size_t ci = 0; ci < grid_.cols.size(); ++ci) {
      const int j = grid_.cols[ci] - base_col0;
      if (j >= 0 && j < n) insert(ri, static_cast<int>(ci), {sums[static_cast<std::size_t>(j)], dr, dc});
    }
  }
  const int ref_row = base_row + o.dr;
  if (ref_row >= 0 && ref_row < height_ && row_index_[static_cast<std::size_t>(ref_row)] >= 0) {
    const int ri = row_index_[static_cast<std::size_t>(ref_row)];
    const auto dr = static_cast<std::int16_t>(-o.dr);
    const auto dc = static_cast<std::int16_t>(-o.dc);
    for (std::size_t ci = 0; ci < grid_.cols.size(); ++ci) {
      const int j = grid_.cols[ci] - o.dc - base_col0;
      if (j >= 0 && j < n) insert(ri, static_cast<int>(ci), {sums[static_cast<std::size_t>(j)], dr, dc});
    }
  }
}

void PickNBest::merge(const PickNBest& other) {
  if (other.grid_.rows != grid_.rows || other.grid_.cols != grid_.cols ||
      other.capacity_ != capacity_) {
    throw InvalidArgument("PickNBest::merge: incompatible accumulators");
  }
  for (std::size_t idx = 0; idx < fill_.size(); ++idx) {
    const int ri = static_cast<int>(idx / grid_.cols.size());
    const int ci = static_cast<int>(idx % grid_.cols.size());
    const Slot* first = other.heap_.data() + idx * capacity_;
    for (std::size_t i = 0; i < other.fill_[idx]; ++i) insert(ri, ci, first[i]);
  }
}

MatchTable PickNBest::finish() const {
  MatchTable table(width_, height_, params_);
  for (std::size_t ri = 0; ri < grid_.rows.size(); ++ri) {
    for (std::size_t ci = 0; ci < grid_.cols.size(); ++ci) {
      const std::size_t idx = ri * grid_.cols.size() + ci;
      const Slot* first = heap_.data() + idx * capacity_;
      MatchTable::List list;
      list.reserve(fill_[idx] + 1u);
      list.push_back({0, 0, 0.0});
      for (std::size_t i = 0; i < fill_[idx]; ++i) {
        list.push_back({first[i].dr, first[i].dc,
                        normalized_distance(first[i].ssd, params_.block_size)});
      }
      std::sort(list.begin(), list.end(), MatchOrder{});
      table.set({grid_.rows[ri], grid_.cols[ci]}, std::move(list));
    }
  }
  return table;
}

MatchTable pick_n_best(std::span<const SumTable> tables, const MatchParams& params, int width,
                       int height, const ReferenceGrid& grid) {
  params.validate();
  const auto expected = half_plane_offsets(params.half_window());
  std::set<Offset> seen;
  for (const auto& t : tables) seen.insert(t.offset);
  for (Offset o : expected) {
    if (!seen.count(o)) {
      throw Error("missing offset coverage: no sum table for offset (" + std::to_string(o.dr) +
                  ", " + std::to_string(o.dc) + ")");
    }
  }
  PickNBest best(width, height, params, grid);
  for (const auto& t : tables) {
    for (int r : grid.rows) {
      for (int c : grid.cols) {
        const Coord b{r, c};
        if (t.valid(b)) best.insert_forward(t.offset, b, t.at(b));
        const Coord mirror{r - t.offset.dr, c - t.offset.dc};
        if (t.valid(mirror)) best.insert_mirrored(t.offset, mirror, t.at(mirror));
      }
    }
  }
  return best.finish();
}

// --- Engine -----------------------------------------------------------------

MatchTable find_matches_stream(const ImagePlane& img, const MatchParams& params,
                               const StreamOptions& options) {
  params.validate();
  const Rect region =
      overlap_region(img.width(), img.height(), params.half_window(), params.block_size);
  return find_matches_stream(img, params, stride_grid(region, params.stride), options);
}

MatchTable find_matches_stream(const ImagePlane& img, const MatchParams& params,
                               const ReferenceGrid& grid, const StreamOptions& options) {
  params.validate();
  const int k = params.block_size;
  if (k > kMaxStreamBlock) {
    throw InvalidArgument("stream engine supports block sizes up to " +
                          std::to_string(kMaxStreamBlock));
  }
  if (!img.is_8bit_valued()) {
    throw InvalidArgument("stream engine requires an 8-bit-valued plane");
  }
  if (img.width() < k || img.height() < k) throw InvalidArgument("image smaller than block");

  const Gray8 pixels = prethreshold(quantize_8bit(img), params.lambda2d, params.sigma);
  const simd::Kernels& kernels = options.kernels ? *options.kernels : simd::active();
  const auto groups = plan_workers(params);

  std::vector<std::size_t> order = options.group_order;
  if (order.empty()) {
    order.resize(groups.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i || sorted.size() != groups.size()) {
        throw InvalidArgument("group_order is not a permutation of the worker plan");
      }
    }
  }

  // One accumulator per concurrently running task; merging is order-free.
  std::mutex pool_mu;
  std::vector<std::unique_ptr<PickNBest>> pool;
  std::vector<PickNBest*> idle;
  StreamStats stats;
  stats.groups = groups.size();

  parallel_for(order.size(), [&](std::size_t task) {
    PickNBest* acc = nullptr;
    {
      std::lock_guard lock(pool_mu);
      if (idle.empty()) {
        pool.push_back(std::make_unique<PickNBest>(img.width(), img.height(), params, grid));
        idle.push_back(pool.back().get());
      }
      acc = idle.back();
      idle.pop_back();
    }
    StreamStats local;
    std::vector<std::uint32_t> scratch;
    for (Offset o : groups[order[task]]) {
      const Rect px = offset_pixel_region(img.width(), img.height(), o);
      if (px.rows() < k || px.cols() < k) continue;
      DiffStream diffs(pixels, o, px, kernels);
      SlidingBlockSum state(px.cols(), k, kernels);
      local.peak_buffered_elements =
          std::max(local.peak_buffered_elements, state.buffered_elements());
      local.max_region_cols = std::max(local.max_region_cols, px.cols());
      ++local.offsets;
      for (int i = 0; diffs.next_row(state.input_slot()); ++i) {
        auto sums = state.commit();
        if (i < k - 1) continue;
        auto valid = sums.subspan(static_cast<std::size_t>(k - 1));
        const int base_row = px.row0 + i - k + 1;
        local.sums_emitted += valid.size();
        if (options.on_sums) {
          scratch.assign(valid.begin(), valid.end());
          options.on_sums(o, base_row, px.col0, scratch);
          acc->insert_row(o, base_row, px.col0, scratch);
        } else {
          acc->insert_row(o, base_row, px.col0, valid);
        }
      }
    }
    std::lock_guard lock(pool_mu);
    idle.push_back(acc);
    stats.offsets += local.offsets;
    stats.sums_emitted += local.sums_emitted;
    stats.peak_buffered_elements =
        std::max(stats.peak_buffered_elements, local.peak_buffered_elements);
    stats.max_region_cols = std::max(stats.max_region_cols, local.max_region_cols);
  });

  if (options.stats) *options.stats = stats;
  if (pool.empty()) return PickNBest(img.width(), img.height(), params, grid).finish();
  for (std::size_t i = 1; i < pool.size(); ++i) pool[0]->merge(*pool[i]);
  return pool[0]->finish();
}

}  // namespace sbm
