#include <cmath>
#include <vector>

#include "sbm/baselines.hpp"
#include "sbm/error.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

namespace {

// Reflect-101: -1 -> 1, n -> n-2. Degenerate one-pixel axes clamp.
int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> spatial_kernel(double sigma_s, int radius) {
  const int side = 2 * radius + 1;
  std::vector<double> g(static_cast<std::size_t>(side * side));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      g[static_cast<std::size_t>((dy + radius) * side + dx + radius)] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s));
    }
  }
  return g;
}

}  // namespace

int FilterParams::effective_radius() const {
  return radius > 0 ? radius : static_cast<int>(std::ceil(3.0 * sigma_s));
}

void FilterParams::validate() const {
  if (!(sigma_s > 0.0)) throw InvalidArgument("sigma_s must be > 0");
  if (!(sigma_r > 0.0)) throw InvalidArgument("sigma_r must be > 0");
  if (radius < 0) throw InvalidArgument("radius must be >= 1 (or 0 for automatic)");
}

ImagePlane gaussian_smooth(const ImagePlane& img, double sigma_s, int radius) {
  FilterParams p{sigma_s, 1.0, radius};
  p.validate();
  const int rad = std::max(1, p.effective_radius());
  const int side = 2 * rad + 1;
  const auto g = spatial_kernel(sigma_s, rad);
  double total = 0.0;
  for (double v : g) total += v;
  ImagePlane out(img.width(), img.height());
  parallel_for(static_cast<std::size_t>(img.height()), [&](std::size_t row) {
    const int r = static_cast<int>(row);
    for (int c = 0; c < img.width(); ++c) {
      double acc = 0.0;
      for (int dy = -rad; dy <= rad; ++dy) {
        const int rr = mirror(r + dy, img.height());
        for (int dx = -rad; dx <= rad; ++dx) {
          acc += g[static_cast<std::size_t>((dy + rad) * side + dx + rad)] *
                 img(rr, mirror(c + dx, img.width()));
        }
      }
      out(r, c) = acc / total;
    }
  });
  return out;
}

ImagePlane bilateral_filter(const ImagePlane& img, const FilterParams& params) {
  params.validate();
  const int rad = std::max(1, params.effective_radius());
  const int side = 2 * rad + 1;
  const auto g = spatial_kernel(params.sigma_s, rad);
  const double inv_two_var_r = 1.0 / (2.0 * params.sigma_r * params.sigma_r);
  ImagePlane out(img.width(), img.height());
  parallel_for(static_cast<std::size_t>(img.height()), [&](std::size_t row) {
    const int r = static_cast<int>(row);
    for (int c = 0; c < img.width(); ++c) {
      const double center = img(r, c);
      double acc = 0.0;
      double wp = 0.0;
      for (int dy = -rad; dy <= rad; ++dy) {
        const int rr = mirror(r + dy, img.height());
        for (int dx = -rad; dx <= rad; ++dx) {
          const double v = img(rr, mirror(c + dx, img.width()));
          const double d = v - center;
          const double w = g[static_cast<std::size_t>((dy + rad) * side + dx + rad)] *
                           std::exp(-d * d * inv_two_var_r);
          acc += w * v;
          wp += w;
        }
      }
      out(r, c) = acc / wp;
    }
  });
  return out;
}

}  // namespace sbm
