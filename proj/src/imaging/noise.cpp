#include <random>

#include "sbm/error.hpp"
#include "sbm/imaging.hpp"

namespace sbm {

ImagePlane add_wagn(const ImagePlane& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
  ImagePlane out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.data()) v += noise(rng);
  return out;
}

}  // namespace sbm
