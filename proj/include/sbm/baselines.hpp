#pragma once

#include "sbm/imaging.hpp"

namespace sbm {

struct FilterParams {
  double sigma_s = 2.0;   // spatial std-dev, pixels
  double sigma_r = 25.0;  // range std-dev, intensity
  int radius = 0;         // kernel half-width; 0 means ceil(3 sigma_s)

  int effective_radius() const;
  void validate() const;
};

/// Normalized truncated Gaussian convolution, reflect-101 borders.
/// radius 0 selects ceil(3 sigma_s).
ImagePlane gaussian_smooth(const ImagePlane& img, double sigma_s, int radius = 0);

/// Bilateral filter: spatial and range Gaussians renormalized per pixel.
ImagePlane bilateral_filter(const ImagePlane& img, const FilterParams& params);

}  // namespace sbm
