#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <set>

#include "naive.hpp"
#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/match_stream.hpp"
#include "sbm/matcher.hpp"
#include "sbm/parallel.hpp"

using namespace sbm;

namespace {

MatchParams params(int k, int ws, int n, int stride = 1, int workers = 1) {
  MatchParams p;
  p.block_size = k;
  p.window_size = ws;
  p.max_matches = n;
  p.stride = stride;
  p.n_workers = workers;
  return p;
}

}  // namespace

TEST_CASE("half-plane enumeration") {
  CHECK(half_plane_offsets(16).size() == 544);
  CHECK(half_plane_offsets(4).size() == 40);
  const auto o = half_plane_offsets(2);
  const std::vector<Offset> want = {{0, 1}, {0, 2},  {1, -2}, {1, -1}, {1, 0}, {1, 1}, {1, 2},
                                    {2, -2}, {2, -1}, {2, 0}, {2, 1},  {2, 2}};
  CHECK(o == want);
  // Every non-zero offset of the square window appears exactly once up to sign.
  std::set<Offset> both;
  for (Offset x : half_plane_offsets(5)) {
    CHECK(both.insert(x).second);
    CHECK(both.insert({-x.dr, -x.dc}).second);
  }
  CHECK(both.size() == 11u * 11u - 1u);
}

TEST_CASE("overlap region bounds") {
  CHECK(overlap_region(1280, 720, 16, 8) == Rect{0, 696, 16, 1256});
  CHECK(overlap_region(20, 12, 0, 4) == Rect{0, 8, 0, 16});
  CHECK_THROWS_AS(overlap_region(40, 100, 16, 8), InvalidArgument);
  CHECK_THROWS_AS(overlap_region(100, 24, 16, 8), InvalidArgument);
  CHECK_NOTHROW(overlap_region(41, 25, 16, 8));
}

TEST_CASE("offset pixel regions") {
  CHECK(offset_pixel_region(10, 8, {0, 3}) == Rect{0, 7, 0, 6});
  CHECK(offset_pixel_region(10, 8, {2, -3}) == Rect{0, 5, 3, 9});
}

TEST_CASE("differential streams") {
  const Gray8 flat = quantize_8bit(ImagePlane(12, 10, 77.0));
  for (auto v : diff_stream(flat, {1, -2}, offset_pixel_region(12, 10, {1, -2}))) CHECK(v == 0u);

  const Gray8 ramp = quantize_8bit(make_ramp_image(16, 9));
  for (Offset o : half_plane_offsets(3)) {
    for (auto v : diff_stream(ramp, o, offset_pixel_region(16, 9, o))) {
      CHECK(v == static_cast<std::uint32_t>(o.dc * o.dc));
    }
  }

  ImagePlane checker(9, 7);
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 9; ++c) checker(r, c) = (r + c) % 2 ? 255.0 : 0.0;
  }
  for (auto v : diff_stream(quantize_8bit(checker), {0, 1}, offset_pixel_region(9, 7, {0, 1}))) {
    CHECK(v == 65025u);
  }

  // Row-by-row interface yields the same rows and then stops.
  const Gray8 g = quantize_8bit(naive::random_plane(11, 6, 1));
  const Rect region = offset_pixel_region(11, 6, {1, 2});
  DiffStream s(g, {1, 2}, region);
  const auto whole = diff_stream(g, {1, 2}, region);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(s.cols()));
  for (int r = 0; r < s.rows(); ++r) {
    REQUIRE(s.next_row(row));
    CHECK(std::equal(row.begin(), row.end(), whole.begin() + r * s.cols()));
  }
  CHECK_FALSE(s.next_row(row));
}

TEST_CASE("sliding sums equal naive double-loop sums, warm-up included") {
  std::uint64_t seed = 40;
  for (int k : {2, 3, 4, 7}) {
    const ImagePlane img = naive::random_plane(16, 16, seed++);
    const Gray8 g = quantize_8bit(img);
    for (Offset o : half_plane_offsets(3)) {
      CAPTURE(k);
      CAPTURE(o.dr);
      CAPTURE(o.dc);
      const Rect px = offset_pixel_region(16, 16, o);
      const auto diffs = diff_stream(g, o, px);
      int rows, cols, r0, c0;
      const auto nd = naive::diff_image(img, o.dr, o.dc, rows, cols, r0, c0);
      REQUIRE(rows == px.rows());
      REQUIRE(cols == px.cols());
      const auto raw = sliding_block_sum_raw(diffs, px, k);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          REQUIRE(raw[static_cast<std::size_t>(i * cols + j)] ==
                  naive::padded_block_sum(nd, cols, i, j, k));
        }
      }
      const SumTable t = sliding_block_sum(diffs, px, k, o);
      CHECK(t.base_region == Rect{px.row0, px.row1 - k + 1, px.col0, px.col1 - k + 1});
      for (int r = t.base_region.row0; r <= t.base_region.row1; ++r) {
        for (int c = t.base_region.col0; c <= t.base_region.col1; ++c) {
          REQUIRE(t.valid({r, c}));
          CHECK(t.at({r, c}) == naive::block_ssd(img, {r, c}, {r + o.dr, c + o.dc}, k));
        }
      }
      CHECK_FALSE(t.valid({t.base_region.row1 + 1, t.base_region.col0}));
    }
  }
}

TEST_CASE("sliding sum edge cases") {
  const Rect region{0, 5, 0, 5};
  const std::vector<std::uint32_t> zeros(36, 0);
  for (auto v : sliding_block_sum(zeros, region, 3).sums) CHECK(v == 0u);
  CHECK_THROWS_AS(sliding_block_sum(std::span(zeros).first(35), region, 3), InvalidArgument);
  const SumTable ramp = compute_sum_table(quantize_8bit(make_ramp_image(20, 20)), {0, 2}, 3);
  REQUIRE(ramp.size() > 0);
  for (auto v : ramp.sums) CHECK(v == 36u);
}

TEST_CASE("sliding block buffer stays within (k+1) rows plus a sum row") {
  for (int k : {2, 8, 16}) {
    const int w = 50;
    SlidingBlockSum s(w, k);
    std::vector<std::uint32_t> row(w, 1);
    std::size_t peak = 0;
    for (int r = 0; r < 3 * k; ++r) {
      const auto out = s.push_row(row);
      peak = std::max(peak, s.buffered_elements());
      if (r >= k - 1) CHECK(out[static_cast<std::size_t>(w - 1)] == static_cast<std::uint32_t>(k * k));
    }
    CHECK(peak <= static_cast<std::size_t>((k + 1) * w + w));
  }
}

TEST_CASE("worker plans") {
  CHECK(plan_workers(params(8, 32, 16, 1, 4)).size() == 136);
  CHECK(plan_workers(params(8, 32, 16, 1, 16)).size() == 34);
  CHECK(plan_workers(params(3, 8, 16, 1, 4)).size() == 10);
  for (const auto& g : plan_workers(params(8, 32, 16, 1, 4))) CHECK(g.size() == 4);
  const auto singles = plan_workers(params(3, 8, 4, 1, 1));
  const auto order = half_plane_offsets(4);
  REQUIRE(singles.size() == order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    REQUIRE(singles[i].size() == 1);
    CHECK(singles[i][0] == order[i]);
  }
  CHECK_THROWS_AS(plan_workers(params(8, 32, 16, 1, 5)), InvalidArgument);
}

TEST_CASE("stride filter") {
  SumTable t;
  t.offset = {0, 1};
  t.base_region = Rect{2, 10, 5, 13};
  for (int r = 2; r <= 10; ++r) t.rows.push_back(r);
  for (int c = 5; c <= 13; ++c) t.cols.push_back(c);
  t.sums.resize(81);
  std::iota(t.sums.begin(), t.sums.end(), 0u);

  const SumTable same = stride_filter(t, 1);
  CHECK(same.sums == t.sums);
  CHECK(same.rows == t.rows);

  const SumTable s3 = stride_filter(t, 3);
  CHECK(s3.size() == 16);
  CHECK(s3.rows == std::vector<int>{2, 5, 8, 10});
  CHECK(s3.cols == std::vector<int>{5, 8, 11, 13});
  CHECK(s3.at({5, 11}) == t.at({5, 11}));
  CHECK_FALSE(s3.valid({3, 5}));

  const SumTable wide = stride_filter(t, 20);
  CHECK(wide.rows == std::vector<int>{2, 10});
  CHECK(wide.cols == std::vector<int>{5, 13});
}

TEST_CASE("pick-N keeps the smallest distances regardless of arrival order") {
  // k = 2: dist = ssd / 4. Distances 4, 1, 3, 2, 5 arrive in that order.
  MatchParams p = params(2, 4, 4);
  ReferenceGrid grid{{6}, {6}};
  PickNBest pick(20, 20, p, grid);
  const Offset offs[] = {{0, 1}, {0, 2}, {1, -1}, {1, 0}, {1, 1}};
  const std::uint32_t ssd[] = {16, 4, 12, 8, 20};
  for (int i = 0; i < 5; ++i) pick.insert_forward(offs[i], {6, 6}, ssd[i]);
  const auto list = pick.finish().at({6, 6});
  REQUIRE(list.size() == 4);
  CHECK(list[0].is_self());
  CHECK(list[1] == MatchEntry{0, 2, 1.0});
  CHECK(list[2] == MatchEntry{1, 0, 2.0});
  CHECK(list[3] == MatchEntry{1, -1, 3.0});

  // Mirrored role: reference (6, 6) sees candidate (6, 6) - offset.
  PickNBest mirror(20, 20, params(2, 4, 2), grid);
  mirror.insert_mirrored({1, 1}, {5, 5}, 4);
  CHECK(mirror.finish().at({6, 6})[1] == MatchEntry{-1, -1, 1.0});
}

TEST_CASE("pick-N merge is order independent") {
  MatchParams p = params(2, 4, 3);
  ReferenceGrid grid{{6}, {6}};
  PickNBest a(20, 20, p, grid), b(20, 20, p, grid), all(20, 20, p, grid);
  a.insert_forward({0, 1}, {6, 6}, 8);
  a.insert_forward({0, 2}, {6, 6}, 4);
  b.insert_forward({1, 0}, {6, 6}, 4);
  b.insert_forward({1, 1}, {6, 6}, 1);
  for (auto [o, s] : {std::pair{Offset{0, 1}, 8u}, {Offset{0, 2}, 4u}, {Offset{1, 0}, 4u}, {Offset{1, 1}, 1u}}) {
    all.insert_forward(o, {6, 6}, s);
  }
  PickNBest ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab.finish() == all.finish());
  CHECK(ba.finish() == all.finish());
}

TEST_CASE("materialized pick_n_best over precomputed tables") {
  const ImagePlane img = naive::random_plane(32, 32, 77);
  const MatchParams p = params(4, 8, 8);
  const Gray8 g = quantize_8bit(img);
  std::vector<SumTable> tables;
  for (Offset o : half_plane_offsets(4)) tables.push_back(compute_sum_table(g, o, 4));
  const ReferenceGrid grid = stride_grid(overlap_region(32, 32, 4, 4), 1);
  const MatchTable t = pick_n_best(tables, p, 32, 32, grid);
  CHECK(t == find_matches_block(img, p, grid));
  tables.pop_back();
  CHECK_THROWS_WITH_AS(pick_n_best(tables, p, 32, 32, grid), doctest::Contains("missing offset"), Error);
}

TEST_CASE("stream engine equals the oracle on the overlap region") {
  const ImagePlane img = naive::random_plane(32, 32, 5);
  const MatchParams p = params(4, 8, 8);
  const Rect ov = overlap_region(32, 32, 4, 4);
  const MatchTable s = find_matches_stream(img, p);
  CHECK(s.size() == static_cast<std::size_t>(ov.rows() * ov.cols()));
  CHECK(s == find_matches_block(img, p).restricted_to(ov));
}

TEST_CASE("stream engine is exact on the full frame and with ties") {
  std::uint64_t seed = 90;
  for (int levels : {2, 5, 256}) {
    for (int stride : {1, 2, 3}) {
      const ImagePlane img = naive::random_plane(29, 27, seed++, levels);
      MatchParams p = params(3, 8, 6, stride, 2);
      p.tau = levels == 256 ? 3000.0 : 1.0;
      const ReferenceGrid full = stride_grid(block_positions(29, 27, 3), stride);
      CHECK(find_matches_stream(img, p, full) == find_matches_block(img, p));
      const auto refs = naive::grid_coords(full.rows, full.cols);
      CHECK(find_matches_stream(img, p, full) == naive::match_table(img, p, refs));
    }
  }
}

TEST_CASE("pre-threshold applies identically in both engines") {
  const ImagePlane img = naive::random_plane(30, 30, 14);
  MatchParams p = params(4, 8, 6);
  p.lambda2d = 2.0;
  p.sigma = 40.0;
  CHECK(find_matches_stream(img, p) == find_matches_block(img, p, stride_grid(overlap_region(30, 30, 4, 4), 1)));
}

TEST_CASE("any group execution order and thread count gives the same table") {
  const ImagePlane img = naive::random_plane(48, 40, 21, 6);
  const MatchParams p = params(3, 8, 5, 1, 4);
  const MatchTable base = find_matches_stream(img, p);
  std::mt19937 rng(3);
  const std::size_t groups = plan_workers(p).size();
  for (int trial = 0; trial < 6; ++trial) {
    StreamOptions o;
    o.group_order.resize(groups);
    std::iota(o.group_order.begin(), o.group_order.end(), 0u);
    std::shuffle(o.group_order.begin(), o.group_order.end(), rng);
    set_thread_count(1 + trial % 3);
    CHECK(find_matches_stream(img, p, o) == base);
  }
  set_thread_count(0);
  StreamOptions bad;
  bad.group_order = {0, 0};
  CHECK_THROWS_AS(find_matches_stream(img, p, bad), InvalidArgument);
}

TEST_CASE("stats and the sums hook") {
  const ImagePlane ramp = make_ramp_image(64, 64);
  const MatchParams p = params(3, 8, 4, 1, 4);
  StreamStats stats;
  StreamOptions o;
  o.stats = &stats;
  std::atomic<std::size_t> seen{0};
  std::atomic<std::size_t> wrong{0};
  o.on_sums = [&](Offset off, int, int, std::span<std::uint32_t> sums) {
    seen += sums.size();
    for (auto v : sums) wrong += v != static_cast<std::uint32_t>(9 * off.dc * off.dc);
  };
  find_matches_stream(ramp, p, o);
  CHECK(stats.offsets == 40);
  CHECK(stats.groups == 10);
  CHECK(stats.sums_emitted == seen.load());
  CHECK(wrong.load() == 0);
  CHECK(stats.peak_buffered_elements <= static_cast<std::size_t>((3 + 1) * 64 + 64));
}

TEST_CASE("stream engine input checks") {
  ImagePlane img = naive::random_plane(30, 30, 1);
  img(0, 0) = 0.5;
  CHECK_THROWS_AS(find_matches_stream(img, params(3, 8, 4)), InvalidArgument);
  CHECK_THROWS_AS(find_matches_stream(naive::random_plane(10, 10, 1), params(3, 8, 4)), InvalidArgument);
  CHECK_THROWS_AS(find_matches_stream(naive::random_plane(30, 30, 1), params(3, 8, 4, 1, 3)), InvalidArgument);
}

TEST_CASE("match_blocks backends agree, including on the frame-size contract") {
  const ImagePlane img = naive::random_plane(45, 41, 9, 16);
  MatchParams p = params(4, 16, 7, 3, 4);
  CHECK(match_blocks(img, p, MatchBackend::stream) == match_blocks(img, p, MatchBackend::oracle));
  const ImagePlane small = naive::random_plane(19, 30, 9);
  CHECK_THROWS_AS(match_blocks(small, p, MatchBackend::stream), InvalidArgument);
  CHECK_THROWS_AS(match_blocks(small, p, MatchBackend::oracle), InvalidArgument);
  CHECK(parse_backend("stream") == MatchBackend::stream);
  CHECK_THROWS_AS(parse_backend("fpga"), InvalidArgument);
}
