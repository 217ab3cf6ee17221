#include "sbm/patch_stack.hpp"

#include <bit>

#include "sbm/error.hpp"

namespace sbm {

PatchStack::PatchStack(int block, int layers) : k(block), depth(layers) {
  if (block < 1 || layers < 1 || !std::has_single_bit(static_cast<unsigned>(layers))) {
    throw InvalidArgument("patch stack depth must be a power of two");
  }
  values.assign(static_cast<std::size_t>(layers) * layer_size(), 0.0);
  positions.resize(static_cast<std::size_t>(layers));
}

int floor_pow2(int n) {
  if (n < 1) throw InvalidArgument("floor_pow2: n must be >= 1");
  return static_cast<int>(std::bit_floor(static_cast<unsigned>(n)));
}

}  // namespace sbm
