#include <string>

#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"

namespace sbm {

AggregationBuffers::AggregationBuffers(int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("aggregation buffers need a positive size");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  nu_.assign(n, 0.0);
  delta_.assign(n, 0.0);
}

void AggregationBuffers::aggregate(const PatchStack& filtered, double weight,
                                   std::span<const double> window) {
  const int k = filtered.k;
  if (window.size() != filtered.layer_size()) {
    throw InvalidArgument("aggregate: window size does not match patch size");
  }
  for (int l = 0; l < filtered.depth; ++l) {
    const Coord q = filtered.positions[static_cast<std::size_t>(l)];
    if (q.r < 0 || q.c < 0 || q.r + k > height_ || q.c + k > width_) {
      throw InvalidArgument("aggregate: patch position out of frame");
    }
    auto est = filtered.layer(l);
    for (int i = 0; i < k; ++i) {
      const std::size_t row = static_cast<std::size_t>(q.r + i) * static_cast<std::size_t>(width_) +
                              static_cast<std::size_t>(q.c);
      for (int j = 0; j < k; ++j) {
        const std::size_t p = static_cast<std::size_t>(i * k + j);
        const double wk = weight * window[p];
        nu_[row + static_cast<std::size_t>(j)] += wk * est[p];
        delta_[row + static_cast<std::size_t>(j)] += wk;
      }
    }
  }
}

ImagePlane AggregationBuffers::finalize() const {
  ImagePlane out(width_, height_);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!(delta_[i] > 0.0)) {
      throw Error("uncovered pixel at (" + std::to_string(i / static_cast<std::size_t>(width_)) +
                  ", " + std::to_string(i % static_cast<std::size_t>(width_)) + ")");
    }
    dst[i] = nu_[i] / delta_[i];
  }
  return out;
}

ImagePlane AggregationBuffers::finalize(const ImagePlane& fallback) const {
  if (fallback.width() != width_ || fallback.height() != height_) {
    throw InvalidArgument("fallback plane size mismatch");
  }
  ImagePlane out(width_, height_);
  auto dst = out.data();
  const auto alt = fallback.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = delta_[i] > 0.0 ? nu_[i] / delta_[i] : alt[i];
  }
  return out;
}

}  // namespace sbm
