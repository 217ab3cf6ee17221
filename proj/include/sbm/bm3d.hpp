#pragma once

#include <span>
#include <vector>

#include "sbm/imaging.hpp"
#include "sbm/match_types.hpp"
#include "sbm/matcher.hpp"
#include "sbm/patch_stack.hpp"

namespace sbm {

/// Separable 3D isometry: orthonormal 2D DCT-II per patch, then orthonormal
/// Walsh-Hadamard along the stack depth.
class Transform3d {
 public:
  explicit Transform3d(int k);

  int block() const { return k_; }
  void forward(PatchStack& stack) const;
  void inverse(PatchStack& stack) const;

 private:
  void dct2d(std::span<double> patch, std::span<double> scratch, bool inverse) const;

  int k_;
  std::vector<double> basis_;  // basis_[u * k + x] = alpha(u) cos(pi (2x+1) u / 2k)
};

/// In-place orthonormal fast Walsh-Hadamard transform; n must be a power of 2.
void hadamard_inplace(std::span<double> v, std::size_t stride, std::size_t n);

struct HardResult {
  PatchStack stack;
  double weight = 1.0;
  int retained = 0;  // nonzero coefficients after thresholding
};

/// Hard-threshold collaborative filtering: coefficients with
/// |coef| <= lambda3d * sigma are zeroed; weight = 1 / retained (1 if none).
HardResult collaborative_hard(const PatchStack& stack, double lambda3d, double sigma,
                              const Transform3d& transform);
HardResult collaborative_hard(const PatchStack& stack, double lambda3d, double sigma);

struct WienerResult {
  PatchStack stack;
  double weight = 1.0;
  bool degenerate = false;  // ||omega|| == 0: group carries no estimate
};

/// Empirical Wiener shrinkage of the noisy stack driven by the basic stack:
/// omega = B^2 / (B^2 + sigma^2), weight = 1 / ||omega||^2.
WienerResult collaborative_wiener(const PatchStack& noisy, const PatchStack& basic, double sigma,
                                  const Transform3d& transform);
WienerResult collaborative_wiener(const PatchStack& noisy, const PatchStack& basic, double sigma);

/// k x k separable Kaiser window, row-major.
std::vector<double> kaiser_window(int k, double beta);

/// Numerator / denominator accumulators of the weighted patch average.
class AggregationBuffers {
 public:
  AggregationBuffers(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const double> nu() const { return nu_; }
  std::span<const double> delta() const { return delta_; }

  /// nu += w * window * estimate, delta += w * window over every layer.
  void aggregate(const PatchStack& filtered, double weight, std::span<const double> window);

  /// nu / delta; throws Error("uncovered pixel ...") where delta == 0.
  ImagePlane finalize() const;
  /// nu / delta, taking fallback where delta == 0.
  ImagePlane finalize(const ImagePlane& fallback) const;

 private:
  int width_;
  int height_;
  std::vector<double> nu_;
  std::vector<double> delta_;
};

struct Bm3dParams {
  MatchParams hard;
  MatchParams wien;
  double lambda3d = 2.7;
  double kaiser_beta = 2.0;
  double sigma = 0.0;

  /// Reference-implementation defaults for the given noise level.
  static Bm3dParams defaults(double sigma);
  void validate() const;
};

/// First pass: group, hard-threshold, aggregate. table comes from the noisy plane.
ImagePlane hard_step(const ImagePlane& noisy, const MatchTable& table, const Bm3dParams& params);

/// Second pass: groups from the basic estimate, Wiener shrinkage of the noisy groups.
/// Degenerate groups are not aggregated; pixels they alone cover keep the basic
/// estimate, which is zero there.
ImagePlane wiener_step(const ImagePlane& noisy, const ImagePlane& basic, const MatchTable& table,
                       const Bm3dParams& params);

struct DenoiseResult {
  ImagePlane basic;
  ImagePlane final_estimate;
};

/// Both passes. Matching runs on the 8-bit quantization of the noisy plane and
/// then of the basic estimate. first_table, when given, replaces step-one matching.
DenoiseResult denoise_steps(const ImagePlane& noisy, const Bm3dParams& params,
                            MatchBackend backend, const MatchTable* first_table = nullptr);
ImagePlane denoise(const ImagePlane& noisy, const Bm3dParams& params,
                   MatchBackend backend = MatchBackend::stream);

}  // namespace sbm
