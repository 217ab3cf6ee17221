#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace sbm {

/// Single-channel real-valued raster, row-major, nominal range [0, 255].
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int width, int height, double fill = 0.0);
  ImagePlane(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int r, int c) const { return data_[index(r, c)]; }
  double& operator()(int r, int c) { return data_[index(r, c)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(int r) const {
    return {data_.data() + index(r, 0), static_cast<std::size_t>(width_)};
  }

  /// True when every value is an integer in [0, 255].
  bool is_8bit_valued() const;

  ImagePlane crop(int row0, int col0, int height, int width) const;

  bool operator==(const ImagePlane&) const = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Interleaved 8-bit RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h);
  RgbImage(int w, int h, std::vector<std::uint8_t> pixels);

  bool operator==(const RgbImage&) const = default;
};

/// 8-bit single-channel raster; the pixel format the matching engines consume.
struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  const std::uint8_t* row(int r) const {
    return pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(width);
  }
  std::uint8_t at(int r, int c) const { return row(r)[c]; }
};

using LoadedImage = std::variant<ImagePlane, RgbImage>;

/// Decodes PGM/PPM (P5/P6, maxval <= 255) or PNG (8-bit gray / RGB), sniffed by magic.
LoadedImage load_image(const std::filesystem::path& path);

/// load_image followed by rgb_to_luma when the file is color.
ImagePlane load_luma(const std::filesystem::path& path);

/// Format chosen by extension: ".png" writes PNG, anything else binary PNM (P5 / P6).
/// Plane values are rounded and clamped to [0, 255].
void save_image(const ImagePlane& img, const std::filesystem::path& path);
void save_image(const RgbImage& img, const std::filesystem::path& path);

/// BT.601 full-range luma.
ImagePlane rgb_to_luma(const RgbImage& img);

/// Adds i.i.d. N(0, sigma^2) noise. Output is not clamped.
ImagePlane add_wagn(const ImagePlane& img, double sigma, std::uint64_t seed);

/// 10 log10(255^2 / MSE), capped at 99 dB (the value for identical planes).
double psnr(const ImagePlane& reference, const ImagePlane& test);

inline constexpr double kPsnrCap = 99.0;

/// I(r, c) = c.
ImagePlane make_ramp_image(int width, int height);

/// Round-half-away and clamp to [0, 255].
Gray8 quantize_8bit(const ImagePlane& img);
ImagePlane to_plane(const Gray8& img);

}  // namespace sbm
