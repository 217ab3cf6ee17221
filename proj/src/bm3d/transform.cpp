#include <cmath>
#include <numbers>

#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"

namespace sbm {

Transform3d::Transform3d(int k) : k_(k) {
  if (k < 1) throw InvalidArgument("transform block size must be >= 1");
  basis_.resize(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    const double alpha = u == 0 ? std::sqrt(1.0 / k) : std::sqrt(2.0 / k);
    for (int x = 0; x < k; ++x) {
      basis_[static_cast<std::size_t>(u * k + x)] =
          alpha * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * k));
    }
  }
}

// forward: Y = C X C^T, inverse: X = C^T Y C.
void Transform3d::dct2d(std::span<double> patch, std::span<double> tmp, bool inverse) const {
  const int k = k_;
  auto C = [&](int a, int b) { return inverse ? basis_[static_cast<std::size_t>(b * k + a)]
                                              : basis_[static_cast<std::size_t>(a * k + b)]; };
  // rows: tmp[i][v] = sum_y X[i][y] C(v, y)
  for (int i = 0; i < k; ++i) {
    for (int v = 0; v < k; ++v) {
      double s = 0.0;
      for (int y = 0; y < k; ++y) s += patch[static_cast<std::size_t>(i * k + y)] * C(v, y);
      tmp[static_cast<std::size_t>(i * k + v)] = s;
    }
  }
  // cols: out[u][v] = sum_i C(u, i) tmp[i][v]
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += C(u, i) * tmp[static_cast<std::size_t>(i * k + v)];
      patch[static_cast<std::size_t>(u * k + v)] = s;
    }
  }
}

void hadamard_inplace(std::span<double> v, std::size_t stride, std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) throw InvalidArgument("hadamard length must be a power of 2");
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j * stride];
        const double b = v[(j + len) * stride];
        v[j * stride] = a + b;
        v[(j + len) * stride] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) v[i * stride] *= scale;
}

void Transform3d::forward(PatchStack& stack) const {
  if (stack.k != k_) throw InvalidArgument("transform: patch size mismatch");
  std::vector<double> tmp(stack.layer_size());
  for (int l = 0; l < stack.depth; ++l) dct2d(stack.layer(l), tmp, false);
  if (stack.depth > 1) {
    for (std::size_t p = 0; p < stack.layer_size(); ++p) {
      hadamard_inplace(std::span(stack.values).subspan(p), stack.layer_size(),
                       static_cast<std::size_t>(stack.depth));
    }
  }
}

void Transform3d::inverse(PatchStack& stack) const {
  if (stack.k != k_) throw InvalidArgument("transform: patch size mismatch");
  if (stack.depth > 1) {
    for (std::size_t p = 0; p < stack.layer_size(); ++p) {
      hadamard_inplace(std::span(stack.values).subspan(p), stack.layer_size(),
                       static_cast<std::size_t>(stack.depth));
    }
  }
  std::vector<double> tmp(stack.layer_size());
  for (int l = 0; l < stack.depth; ++l) dct2d(stack.layer(l), tmp, true);
}

}  // namespace sbm
