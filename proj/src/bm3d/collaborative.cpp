#include <cmath>

#include "sbm/bm3d.hpp"
#include "sbm/error.hpp"

namespace sbm {

HardResult collaborative_hard(const PatchStack& stack, double lambda3d, double sigma,
                              const Transform3d& transform) {
  HardResult out{stack, 1.0, 0};
  transform.forward(out.stack);
  const double threshold = lambda3d * sigma;
  for (double& coef : out.stack.values) {
    if (std::abs(coef) <= threshold) coef = 0.0;
    if (coef != 0.0) ++out.retained;
  }
  transform.inverse(out.stack);
  out.weight = out.retained >= 1 ? 1.0 / out.retained : 1.0;
  return out;
}

HardResult collaborative_hard(const PatchStack& stack, double lambda3d, double sigma) {
  return collaborative_hard(stack, lambda3d, sigma, Transform3d(stack.k));
}

WienerResult collaborative_wiener(const PatchStack& noisy, const PatchStack& basic, double sigma,
                                  const Transform3d& transform) {
  if (noisy.k != basic.k || noisy.depth != basic.depth) {
    throw InvalidArgument("collaborative_wiener: stack shape mismatch");
  }
  WienerResult out{noisy, 1.0, false};
  PatchStack spectrum = basic;
  transform.forward(spectrum);
  transform.forward(out.stack);
  const double var = sigma * sigma;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    const double energy = spectrum.values[i] * spectrum.values[i];
    // sigma == 0 is the identity limit, including zero-energy coefficients.
    const double omega = var == 0.0 ? 1.0 : energy / (energy + var);
    out.stack.values[i] *= omega;
    norm2 += omega * omega;
  }
  transform.inverse(out.stack);
  if (norm2 == 0.0) {
    out.degenerate = true;
    out.weight = 1.0;
  } else {
    out.weight = 1.0 / norm2;
  }
  return out;
}

WienerResult collaborative_wiener(const PatchStack& noisy, const PatchStack& basic, double sigma) {
  return collaborative_wiener(noisy, basic, sigma, Transform3d(noisy.k));
}

std::vector<double> kaiser_window(int k, double beta) {
  if (k < 1) throw InvalidArgument("kaiser window size must be >= 1");
  if (!(beta >= 0.0)) throw InvalidArgument("kaiser beta must be >= 0");
  std::vector<double> w1(static_cast<std::size_t>(k), 1.0);
  if (k > 1) {
    const double norm = std::cyl_bessel_i(0.0, beta);
    for (int n = 0; n < k; ++n) {
      const double x = 2.0 * n / (k - 1) - 1.0;
      w1[static_cast<std::size_t>(n)] = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) / norm;
    }
  }
  std::vector<double> w2(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      w2[static_cast<std::size_t>(i * k + j)] = w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)];
    }
  }
  return w2;
}

}  // namespace sbm
