#include <algorithm>
#include <string>

#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

namespace {

// Groups are filtered in parallel batches and folded into the buffers in
// table order, so the output does not depend on the thread count.
constexpr std::size_t kBatch = 256;

struct Filtered {
  PatchStack stack;
  double weight = 0.0;
  bool skip = false;
};

template <class FilterFn>
ImagePlane run_groups(const ImagePlane& frame, const MatchTable& table, int k, double beta,
                      FilterFn&& filter, const ImagePlane* fallback = nullptr) {
  std::vector<Coord> refs;
  refs.reserve(table.size());
  for (const auto& [ref, list] : table.entries()) refs.push_back(ref);
  const auto window = kaiser_window(k, beta);
  AggregationBuffers buffers(frame.width(), frame.height());
  std::vector<Filtered> batch(kBatch);
  for (std::size_t start = 0; start < refs.size(); start += kBatch) {
    const std::size_t n = std::min(kBatch, refs.size() - start);
    parallel_for(n, [&](std::size_t i) { batch[i] = filter(refs[start + i]); });
    for (std::size_t i = 0; i < n; ++i) {
      if (!batch[i].skip) buffers.aggregate(batch[i].stack, batch[i].weight, window);
    }
  }
  return fallback ? buffers.finalize(*fallback) : buffers.finalize();
}

void check_table(const ImagePlane& img, const MatchTable& table, int k) {
  if (table.width() != img.width() || table.height() != img.height() ||
      table.params().block_size != k) {
    throw InvalidArgument("table incompatible with image or block size");
  }
}

}  // namespace

Bm3dParams Bm3dParams::defaults(double sigma) {
  Bm3dParams p;
  p.sigma = sigma;
  p.hard.block_size = 8;
  p.hard.window_size = 32;
  p.hard.max_matches = 16;
  p.hard.tau = sigma < 40.0 ? 2500.0 : 5000.0;
  p.hard.stride = 3;
  p.hard.n_workers = 4;
  p.hard.sigma = sigma;
  p.wien = p.hard;
  p.wien.max_matches = 32;
  p.wien.tau = sigma < 40.0 ? 400.0 : 3500.0;
  p.wien.lambda2d = 0.0;
  p.lambda3d = 2.7;
  p.kaiser_beta = 2.0;
  return p;
}

void Bm3dParams::validate() const {
  hard.validate();
  wien.validate();
  if (!(lambda3d >= 0.0)) throw InvalidArgument("lambda3d must be >= 0");
  if (!(kaiser_beta >= 0.0)) throw InvalidArgument("kaiser beta must be >= 0");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
}

ImagePlane hard_step(const ImagePlane& noisy, const MatchTable& table, const Bm3dParams& params) {
  params.validate();
  const int k = params.hard.block_size;
  check_table(noisy, table, k);
  const Transform3d transform(k);
  return run_groups(noisy, table, k, params.kaiser_beta, [&](Coord ref) {
    auto r = collaborative_hard(gather_stack(noisy, table, ref), params.lambda3d, params.sigma,
                                transform);
    return Filtered{std::move(r.stack), r.weight, false};
  });
}

ImagePlane wiener_step(const ImagePlane& noisy, const ImagePlane& basic, const MatchTable& table,
                       const Bm3dParams& params) {
  params.validate();
  const int k = params.wien.block_size;
  check_table(noisy, table, k);
  if (basic.width() != noisy.width() || basic.height() != noisy.height()) {
    throw InvalidArgument("wiener_step: basic estimate size mismatch");
  }
  const Transform3d transform(k);
  return run_groups(noisy, table, k, params.kaiser_beta, [&](Coord ref) {
    auto r = collaborative_wiener(gather_stack(noisy, table, ref), gather_stack(basic, table, ref),
                                  params.sigma, transform);
    return Filtered{std::move(r.stack), r.weight, r.degenerate};
  }, &basic);
}

DenoiseResult denoise_steps(const ImagePlane& noisy, const Bm3dParams& params,
                            MatchBackend backend, const MatchTable* first_table) {
  params.validate();
  MatchTable step1;
  if (first_table) {
    check_table(noisy, *first_table, params.hard.block_size);
  } else {
    step1 = match_blocks(to_plane(quantize_8bit(noisy)), params.hard, backend);
  }
  DenoiseResult out;
  out.basic = hard_step(noisy, first_table ? *first_table : step1, params);
  const MatchTable step2 = match_blocks(to_plane(quantize_8bit(out.basic)), params.wien, backend);
  out.final_estimate = wiener_step(noisy, out.basic, step2, params);
  return out;
}

ImagePlane denoise(const ImagePlane& noisy, const Bm3dParams& params, MatchBackend backend) {
  return denoise_steps(noisy, params, backend).final_estimate;
}

}  // namespace sbm
