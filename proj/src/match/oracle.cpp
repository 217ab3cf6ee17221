#include <algorithm>
#include <cmath>
#include <string>

#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/parallel.hpp"
#include "sbm/simd/kernels.hpp"

namespace sbm {

namespace {

bool block_in_frame(int width, int height, Coord p, int k) {
  return p.r >= 0 && p.c >= 0 && p.r + k <= height && p.c + k <= width;
}

double gamma_prime(double v, double threshold) { return std::abs(v) < threshold ? 0.0 : v; }

void check_frame(int width, int height, const MatchParams& params) {
  params.validate();
  const int min_side = params.window_size + params.block_size;
  if (width < min_side || height < min_side) {
    throw InvalidArgument("image " + std::to_string(width) + "x" + std::to_string(height) +
                          " smaller than window + block (" + std::to_string(min_side) + ")");
  }
}

// Candidate distances for one reference, either exact (8-bit) or in doubles.
class CandidateSource {
 public:
  CandidateSource(const ImagePlane& img, const MatchParams& params)
      : params_(params), width_(img.width()), height_(img.height()) {
    if (img.is_8bit_valued()) {
      pixels_ = prethreshold(quantize_8bit(img), params.lambda2d, params.sigma);
      exact_ = true;
    } else {
      const double t = params.lambda2d * params.sigma;
      thresholded_ = img;
      for (double& v : thresholded_.data()) v = gamma_prime(v, t);
    }
  }

  MatchTable::List matches(Coord ref) const {
    const int k = params_.block_size;
    const int hw = params_.half_window();
    const auto& kern = simd::active();
    MatchTable::List found;
    found.reserve(static_cast<std::size_t>((2 * hw + 1) * (2 * hw + 1)));
    for (int dr = -hw; dr <= hw; ++dr) {
      for (int dc = -hw; dc <= hw; ++dc) {
        const Coord q{ref.r + dr, ref.c + dc};
        if (!block_in_frame(width_, height_, q, k)) continue;
        double dist = 0.0;
        if (exact_) {
          const auto stride = static_cast<std::ptrdiff_t>(width_);
          dist = normalized_distance(
              kern.block_ssd(pixels_.row(ref.r) + ref.c, pixels_.row(q.r) + q.c, stride,
                             static_cast<std::size_t>(k)),
              k);
        } else {
          dist = real_distance(ref, q);
        }
        const MatchEntry e{dr, dc, dist};
        if (e.is_self() || dist <= params_.tau) found.push_back(e);
      }
    }
    std::sort(found.begin(), found.end(), MatchOrder{});
    if (found.size() > static_cast<std::size_t>(params_.max_matches)) {
      found.resize(static_cast<std::size_t>(params_.max_matches));
    }
    return found;
  }

 private:
  double real_distance(Coord p, Coord q) const {
    const int k = params_.block_size;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double d = thresholded_(p.r + i, p.c + j) - thresholded_(q.r + i, q.c + j);
        sum += d * d;
      }
    }
    return sum / (static_cast<double>(k) * k);
  }

  MatchParams params_;
  int width_;
  int height_;
  bool exact_ = false;
  Gray8 pixels_;
  ImagePlane thresholded_;
};

}  // namespace

Gray8 prethreshold(const Gray8& img, double lambda2d, double sigma) {
  const double t = lambda2d * sigma;
  if (t <= 0.0) return img;
  Gray8 out = img;
  for (auto& v : out.pixels) {
    if (static_cast<double>(v) < t) v = 0;
  }
  return out;
}

double patch_distance(const ImagePlane& img, Coord p, Coord q, int k, double lambda2d,
                      double sigma) {
  if (!block_in_frame(img.width(), img.height(), p, k) ||
      !block_in_frame(img.width(), img.height(), q, k)) {
    throw InvalidArgument("patch_distance: block out of frame");
  }
  const double t = lambda2d * sigma;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double d = gamma_prime(img(p.r + i, p.c + j), t) - gamma_prime(img(q.r + i, q.c + j), t);
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(k) * k);
}

MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params) {
  params.validate();
  return find_matches_block(
      img, params,
      stride_grid(block_positions(img.width(), img.height(), params.block_size), params.stride));
}

MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params,
                              const ReferenceGrid& grid) {
  std::vector<Coord> refs;
  refs.reserve(grid.size());
  for (int r : grid.rows) {
    for (int c : grid.cols) refs.push_back({r, c});
  }
  return find_matches_block(img, params, refs);
}

MatchTable find_matches_block(const ImagePlane& img, const MatchParams& params,
                              std::span<const Coord> refs) {
  check_frame(img.width(), img.height(), params);
  for (Coord ref : refs) {
    if (!block_in_frame(img.width(), img.height(), ref, params.block_size)) {
      throw InvalidArgument("reference block out of frame");
    }
  }
  const CandidateSource source(img, params);
  std::vector<MatchTable::List> lists(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) { lists[i] = source.matches(refs[i]); });
  MatchTable table(img.width(), img.height(), params);
  for (std::size_t i = 0; i < refs.size(); ++i) table.set(refs[i], std::move(lists[i]));
  return table;
}

PatchStack gather_stack(const ImagePlane& img, const MatchTable& table, Coord ref) {
  const auto& list = table.at(ref);
  const int k = table.params().block_size;
  PatchStack stack(k, floor_pow2(static_cast<int>(list.size())));
  for (int layer = 0; layer < stack.depth; ++layer) {
    const Coord q{ref.r + list[static_cast<std::size_t>(layer)].dr,
                  ref.c + list[static_cast<std::size_t>(layer)].dc};
    if (!block_in_frame(img.width(), img.height(), q, k)) {
      throw InvalidArgument("gather_stack: matched block out of frame");
    }
    stack.positions[static_cast<std::size_t>(layer)] = q;
    auto dst = stack.layer(layer);
    for (int i = 0; i < k; ++i) {
      auto src = img.row(q.r + i).subspan(static_cast<std::size_t>(q.c), static_cast<std::size_t>(k));
      std::copy(src.begin(), src.end(), dst.begin() + i * k);
    }
  }
  return stack;
}

}  // namespace sbm
