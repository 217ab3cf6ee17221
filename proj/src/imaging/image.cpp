#include "sbm/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbm/error.hpp"

namespace sbm {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

std::size_t area(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

ImagePlane::ImagePlane(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(area(width, height), fill);
}

ImagePlane::ImagePlane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != area(width, height)) {
    throw InvalidArgument("plane data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

bool ImagePlane::is_8bit_valued() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) {
    return v >= 0.0 && v <= 255.0 && v == std::floor(v);
  });
}

ImagePlane ImagePlane::crop(int row0, int col0, int height, int width) const {
  if (row0 < 0 || col0 < 0 || row0 + height > height_ || col0 + width > width_) {
    throw InvalidArgument("crop rectangle outside the image");
  }
  ImagePlane out(width, height);
  for (int r = 0; r < height; ++r) {
    auto src = row(row0 + r).subspan(static_cast<std::size_t>(col0),
                                     static_cast<std::size_t>(width));
    std::copy(src.begin(), src.end(), &out(r, 0));
  }
  return out;
}

RgbImage::RgbImage(int w, int h) : width(w), height(h) {
  check_dims(w, h);
  data.assign(3 * area(w, h), 0);
}

RgbImage::RgbImage(int w, int h, std::vector<std::uint8_t> pixels)
    : width(w), height(h), data(std::move(pixels)) {
  check_dims(w, h);
  if (data.size() != 3 * area(w, h)) {
    throw InvalidArgument("rgb data length does not match dimensions");
  }
}

ImagePlane rgb_to_luma(const RgbImage& img) {
  ImagePlane out(img.width, img.height);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = img.data[3 * i];
    const double g = img.data[3 * i + 1];
    const double b = img.data[3 * i + 2];
    dst[i] = 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return out;
}

double psnr(const ImagePlane& reference, const ImagePlane& test) {
  if (reference.width() != test.width() || reference.height() != test.height()) {
    throw InvalidArgument("psnr: dimension mismatch");
  }
  auto a = reference.data();
  auto b = test.data();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrCap;
  const double mse = sse / static_cast<double>(a.size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

ImagePlane make_ramp_image(int width, int height) {
  ImagePlane out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out(r, c) = c;
  }
  return out;
}

Gray8 quantize_8bit(const ImagePlane& img) {
  Gray8 out{img.width(), img.height(), {}};
  out.pixels.resize(img.size());
  auto src = img.data();
  std::transform(src.begin(), src.end(), out.pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  });
  return out;
}

ImagePlane to_plane(const Gray8& img) {
  std::vector<double> data(img.pixels.begin(), img.pixels.end());
  return ImagePlane(img.width, img.height, std::move(data));
}

}  // namespace sbm
