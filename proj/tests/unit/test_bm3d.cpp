#include <doctest.h>

#include <cmath>
#include <random>

#include "naive.hpp"
#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/parallel.hpp"

using namespace sbm;

namespace {

PatchStack random_stack(int k, int depth, std::uint64_t seed, double mean = 100.0) {
  PatchStack s(k, depth);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, 30.0);
  for (double& v : s.values) v = d(rng);
  return s;
}

MatchTable self_only(const ImagePlane& img, int k, int stride) {
  MatchParams p;
  p.block_size = k;
  p.window_size = 2;
  p.max_matches = 1;
  p.stride = stride;
  return find_matches_block(img, p);
}

ImagePlane astronaut_full() {
  return rgb_to_luma(std::get<RgbImage>(load_image(std::string(SBM_TEST_DATA) + "/astronaut.png")));
}

ImagePlane astronaut_crop(int size) { return astronaut_full().crop(64, 128, size, size); }

}  // namespace

TEST_CASE("hard thresholding limits") {
  const PatchStack s = random_stack(4, 4, 1);
  const HardResult id = collaborative_hard(s, 0.0, 20.0);
  for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(id.stack.values[i] == doctest::Approx(s.values[i]).epsilon(1e-12));
  PatchStack coef = s;
  Transform3d(4).forward(coef);
  int nonzero = 0;
  for (double v : coef.values) nonzero += v != 0.0;
  CHECK(id.retained == nonzero);
  CHECK(id.weight == doctest::Approx(1.0 / nonzero));

  const HardResult zero = collaborative_hard(s, 1e6, 20.0);
  CHECK(zero.retained == 0);
  CHECK(zero.weight == 1.0);
  for (double v : zero.stack.values) CHECK(v == 0.0);
}

TEST_CASE("hard threshold counts retained coefficients against the dense transform") {
  const PatchStack s = random_stack(4, 2, 9, 0.0);
  const auto coef = naive::transform_3d(s);
  const double thr = 2.7 * 20.0;
  int keep = 0;
  for (double c : coef) keep += std::abs(c) > thr;
  CHECK(collaborative_hard(s, 2.7, 20.0).retained == keep);
}

TEST_CASE("identical patches: higher layers stay zero through thresholding") {
  PatchStack s = random_stack(4, 4, 2);
  for (int l = 1; l < 4; ++l) std::copy(s.layer(0).begin(), s.layer(0).end(), s.layer(l).begin());
  const HardResult r = collaborative_hard(s, 2.7, 5.0);
  for (int l = 1; l < 4; ++l) {
    for (std::size_t i = 0; i < s.layer_size(); ++i) {
      CHECK(r.stack.layer(l)[i] == doctest::Approx(r.stack.layer(0)[i]));
    }
  }
}

TEST_CASE("Wiener limits") {
  const PatchStack noisy = random_stack(4, 4, 3);
  const PatchStack basic = random_stack(4, 4, 4);
  const WienerResult id = collaborative_wiener(noisy, basic, 0.0);
  for (std::size_t i = 0; i < noisy.values.size(); ++i) CHECK(id.stack.values[i] == doctest::Approx(noisy.values[i]).epsilon(1e-12));
  CHECK(id.weight == doctest::Approx(1.0 / 64.0));
  CHECK_FALSE(id.degenerate);

  PatchStack zero(4, 4);
  const WienerResult deg = collaborative_wiener(noisy, zero, 10.0);
  CHECK(deg.degenerate);
  for (double v : deg.stack.values) CHECK(v == 0.0);

  // 0 <= omega < 1: shrinkage never grows any coefficient.
  const WienerResult w = collaborative_wiener(noisy, basic, 15.0);
  PatchStack n = noisy, out = w.stack;
  Transform3d(4).forward(n);
  Transform3d(4).forward(out);
  for (std::size_t i = 0; i < n.values.size(); ++i) {
    CHECK(std::abs(out.values[i]) < std::abs(n.values[i]) + 1e-9);
    if (n.values[i] != 0.0) CHECK(out.values[i] / n.values[i] >= -1e-12);
  }
  CHECK(w.weight > 0.0);
}

TEST_CASE("Kaiser window against the I0 series") {
  const auto w = kaiser_window(8, 2.0);
  const auto a = naive::kaiser_1d(8, 2.0);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      CHECK(w[static_cast<std::size_t>(i * 8 + j)] == doctest::Approx(a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)]).epsilon(1e-12));
      CHECK(w[static_cast<std::size_t>(i * 8 + j)] == w[static_cast<std::size_t>((7 - i) * 8 + (7 - j))]);
    }
  }
  const double corner = w[0];
  const double center = w[3 * 8 + 3];
  CHECK(*std::max_element(w.begin(), w.end()) == center);
  CHECK(*std::min_element(w.begin(), w.end()) == corner);
  // Corner over center: (1/I0(2)) / I0(2 sqrt(1 - 1/49))^2 ... by the series directly.
  CHECK(corner / center == doctest::Approx(a[0] * a[0] / (a[3] * a[3])).epsilon(1e-12));
  CHECK(a[0] == doctest::Approx(1.0 / 2.2795853023360673).epsilon(1e-12));
  for (double v : kaiser_window(5, 0.0)) CHECK(v == 1.0);
}

TEST_CASE("aggregation buffers") {
  AggregationBuffers buf(6, 5);
  PatchStack s(2, 2);
  s.positions = {{0, 0}, {1, 1}};
  std::fill(s.values.begin(), s.values.end(), 3.0);
  const std::vector<double> ones(4, 1.0);
  buf.aggregate(s, 0.5, ones);
  CHECK(buf.nu()[0] == 1.5);
  CHECK(buf.delta()[0] == 0.5);
  CHECK(buf.delta()[6 + 1] == 1.0);  // overlap of both layers
  CHECK(buf.nu()[6 + 1] == 3.0);
  CHECK_THROWS_WITH_AS(buf.finalize(), doctest::Contains("uncovered pixel"), Error);

  AggregationBuffers full(4, 4);
  PatchStack p(4, 1);
  p.positions = {{0, 0}};
  for (std::size_t i = 0; i < 16; ++i) p.values[i] = static_cast<double>(i);
  full.aggregate(p, 0.25, kaiser_window(4, 2.0));
  const ImagePlane out = full.finalize();
  for (int i = 0; i < 16; ++i) CHECK(out.data()[static_cast<std::size_t>(i)] == doctest::Approx(i).epsilon(1e-14));

  AggregationBuffers twice(4, 4);
  std::fill(p.values.begin(), p.values.end(), 2.0);
  twice.aggregate(p, 1.0, std::vector<double>(16, 1.0));
  const ImagePlane two = twice.finalize();
  for (double v : two.data()) CHECK(v == 2.0);
}

TEST_CASE("identity pipelines") {
  const ImagePlane img = naive::random_plane(48, 44, 12);
  Bm3dParams p = Bm3dParams::defaults(20.0);
  p.hard.block_size = p.wien.block_size = 8;
  p.lambda3d = 0.0;
  const MatchTable t = self_only(img, 8, 3);
  CHECK(naive::max_abs_diff(hard_step(img, t, p), img) <= 1e-6);

  Bm3dParams z = Bm3dParams::defaults(0.0);
  const ImagePlane basic = naive::random_plane(48, 44, 13);
  const MatchTable wt = find_matches_block(basic, z.wien);
  CHECK(naive::max_abs_diff(wiener_step(img, basic, wt, z), img) <= 1e-6);
  CHECK(naive::max_abs_diff(wiener_step(img, basic, self_only(basic, 8, 3), z), img) <= 1e-6);

  const ImagePlane flat(48, 44, 90.0);
  const Bm3dParams d = Bm3dParams::defaults(20.0);
  CHECK(naive::max_abs_diff(hard_step(flat, find_matches_block(flat, d.hard), d), flat) <= 1e-6);
}

TEST_CASE("table compatibility is enforced") {
  const ImagePlane img = naive::random_plane(48, 48, 1);
  const Bm3dParams p = Bm3dParams::defaults(20.0);
  MatchParams m = p.hard;
  m.block_size = 4;
  CHECK_THROWS_WITH_AS(hard_step(img, find_matches_block(img, m), p), doctest::Contains("incompatible"), InvalidArgument);
  CHECK_THROWS_AS(hard_step(img.crop(0, 0, 47, 48), find_matches_block(img, p.hard), p), InvalidArgument);
}

TEST_CASE("defaults and validation") {
  const Bm3dParams low = Bm3dParams::defaults(20.0);
  CHECK(low.hard.max_matches == 16);
  CHECK(low.wien.max_matches == 32);
  CHECK(low.hard.tau == 2500.0);
  CHECK(low.wien.tau == 400.0);
  CHECK(low.lambda3d == 2.7);
  const Bm3dParams high = Bm3dParams::defaults(50.0);
  CHECK(high.hard.tau == 5000.0);
  CHECK(high.wien.tau == 3500.0);
  Bm3dParams bad = low;
  bad.wien.max_matches = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = low;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("end-to-end denoise on an astronaut crop") {
  const ImagePlane clean = astronaut_crop(128);
  const ImagePlane noisy = add_wagn(clean, 20.0, 7);
  const Bm3dParams p = Bm3dParams::defaults(20.0);
  const DenoiseResult s = denoise_steps(noisy, p, MatchBackend::stream);
  const DenoiseResult o = denoise_steps(noisy, p, MatchBackend::oracle);
  CHECK(s.final_estimate == o.final_estimate);
  CHECK(s.basic == o.basic);
  const double pn = psnr(clean, noisy);
  CHECK(psnr(clean, s.basic) > pn);
  CHECK(psnr(clean, s.final_estimate) >= psnr(clean, s.basic) - 0.3);
  for (double v : s.final_estimate.data()) {
    CHECK(std::isfinite(v));
  }

  // The step-one table can be supplied from outside.
  const MatchTable t = match_blocks(to_plane(quantize_8bit(noisy)), p.hard, MatchBackend::oracle);
  CHECK(denoise_steps(noisy, p, MatchBackend::stream, &t).final_estimate == s.final_estimate);

  set_thread_count(1);
  CHECK(denoise(noisy, p) == s.final_estimate);
  set_thread_count(3);
  CHECK(denoise(noisy, p) == s.final_estimate);
  set_thread_count(0);
}

TEST_CASE("zero noise is near identity") {
  const ImagePlane clean = astronaut_crop(64);
  const ImagePlane out = denoise(clean, Bm3dParams::defaults(0.0));
  double mae = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) mae += std::abs(out.data()[i] - clean.data()[i]);
  CHECK(mae / static_cast<double>(out.size()) <= 1e-3);
}

TEST_CASE("finalize with a fallback plane") {
  AggregationBuffers buf(4, 4);
  PatchStack s(2, 1);
  s.positions = {{0, 0}};
  std::fill(s.values.begin(), s.values.end(), 8.0);
  buf.aggregate(s, 1.0, std::vector<double>(4, 1.0));
  const ImagePlane out = buf.finalize(ImagePlane(4, 4, -1.0));
  CHECK(out(0, 0) == 8.0);
  CHECK(out(1, 1) == 8.0);
  CHECK(out(2, 2) == -1.0);
  CHECK_THROWS_AS(buf.finalize(ImagePlane(3, 4)), InvalidArgument);
}

TEST_CASE("Wiener step over a region of zero basic estimate") {
  // Every group inside the zero band is degenerate and skipped; those pixels
  // keep the basic estimate instead of failing as uncovered.
  ImagePlane basic = naive::random_plane(96, 64, 21);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 40; ++c) basic(r, c) = 0.0;
  }
  const ImagePlane noisy = add_wagn(basic, 20.0, 3);
  const Bm3dParams p = Bm3dParams::defaults(20.0);
  const MatchTable t = find_matches_block(basic, p.wien);
  ImagePlane out;
  REQUIRE_NOTHROW(out = wiener_step(noisy, basic, t, p));
  CHECK(out(32, 10) == 0.0);
  CHECK(std::isfinite(out(32, 80)));
}

TEST_CASE("denoise survives saturated black areas") {
  const ImagePlane clean = astronaut_full().crop(256, 256, 256, 256);
  const ImagePlane noisy = add_wagn(clean, 20.0, 7);
  ImagePlane out;
  REQUIRE_NOTHROW(out = denoise(noisy, Bm3dParams::defaults(20.0)));
  CHECK(psnr(clean, out) > psnr(clean, noisy) + 4.0);
}
