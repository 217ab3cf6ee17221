#pragma once

#include <span>
#include <vector>

#include "sbm/match_types.hpp"

namespace sbm {

/// depth layers of k x k patches; depth is a power of two.
struct PatchStack {
  int k = 0;
  int depth = 0;
  std::vector<double> values;   // depth * k * k, layer-major then row-major
  std::vector<Coord> positions;  // source top-left per layer

  PatchStack() = default;
  PatchStack(int block, int layers);

  std::size_t layer_size() const { return static_cast<std::size_t>(k) * static_cast<std::size_t>(k); }
  std::span<double> layer(int i) { return {values.data() + i * layer_size(), layer_size()}; }
  std::span<const double> layer(int i) const {
    return {values.data() + i * layer_size(), layer_size()};
  }
};

/// Largest power of two <= n (n >= 1).
int floor_pow2(int n);

}  // namespace sbm
