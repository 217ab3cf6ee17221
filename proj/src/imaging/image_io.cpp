#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "sbm/error.hpp"
#include "sbm/imaging.hpp"

namespace sbm {

namespace {

namespace fs = std::filesystem;

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(const std::vector<unsigned char>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(buf[pos]) && buf[pos] != '#') {
    tok.push_back(static_cast<char>(buf[pos++]));
  }
  return tok;
}

int parse_positive(const std::string& tok, const fs::path& path) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit) || tok.size() > 9) {
    throw Error("corrupt header in '" + path.string() + "'");
  }
  const int v = std::stoi(tok);
  if (v <= 0) throw Error("corrupt header in '" + path.string() + "'");
  return v;
}

// P5 (gray) or P6 (RGB), maxval <= 255.
LoadedImage decode_pnm(const std::vector<unsigned char>& buf, const fs::path& path) {
  std::size_t pos = 0;
  const std::string magic = pnm_token(buf, pos);
  if (magic != "P5" && magic != "P6") throw Error("corrupt header in '" + path.string() + "'");
  const std::size_t channels = magic == "P6" ? 3 : 1;
  const int width = parse_positive(pnm_token(buf, pos), path);
  const int height = parse_positive(pnm_token(buf, pos), path);
  const int maxval = parse_positive(pnm_token(buf, pos), path);
  if (maxval > 255) {
    throw Error("unsupported bit depth in '" + path.string() + "' (maxval " +
                std::to_string(maxval) + ")");
  }
  if (pos >= buf.size()) throw Error("corrupt payload in '" + path.string() + "'");
  ++pos;  // single whitespace byte before the raster
  const std::size_t n =
      channels * static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (buf.size() - pos < n) throw Error("corrupt payload in '" + path.string() + "'");
  const auto first = buf.begin() + static_cast<std::ptrdiff_t>(pos);
  if (channels == 3) {
    return RgbImage(width, height, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(n)));
  }
  return ImagePlane(width, height, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

LoadedImage decode_png(const std::vector<unsigned char>& buf, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, buf.data(), buf.size())) {
    throw Error("corrupt header in '" + path.string() + "': " + image.message);
  }
  const auto fmt = image.format;
  if (fmt & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error("unsupported bit depth in '" + path.string() + "' (16-bit)");
  }
  if (fmt & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    throw Error("unsupported PNG layout in '" + path.string() + "' (alpha channel)");
  }
  const bool color = (fmt & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error("corrupt payload in '" + path.string() + "': " + msg);
  }
  if (color) return RgbImage(width, height, std::move(pixels));
  return ImagePlane(width, height, std::vector<double>(pixels.begin(), pixels.end()));
}

bool wants_png(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png";
}

void write_bytes(const fs::path& path, const std::string& header,
                 const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_png(const fs::path& path, int width, int height, bool color,
               const std::vector<std::uint8_t>& pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw Error("cannot write '" + path.string() + "': " + image.message);
  }
}

}  // namespace

LoadedImage load_image(const fs::path& path) {
  const auto buf = read_file(path);
  static constexpr unsigned char kPngMagic[] = {0x89, 'P', 'N', 'G'};
  if (buf.size() >= 4 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), buf.begin())) {
    return decode_png(buf, path);
  }
  if (buf.size() >= 2 && buf[0] == 'P' && (buf[1] == '5' || buf[1] == '6')) {
    return decode_pnm(buf, path);
  }
  throw Error("unsupported image format in '" + path.string() + "'");
}

ImagePlane load_luma(const fs::path& path) {
  auto img = load_image(path);
  if (auto* rgb = std::get_if<RgbImage>(&img)) return rgb_to_luma(*rgb);
  return std::get<ImagePlane>(std::move(img));
}

void save_image(const ImagePlane& img, const fs::path& path) {
  const Gray8 q = quantize_8bit(img);
  if (wants_png(path)) {
    write_png(path, q.width, q.height, false, q.pixels);
  } else {
    const std::string header =
        "P5\n" + std::to_string(q.width) + " " + std::to_string(q.height) + "\n255\n";
    write_bytes(path, header, q.pixels);
  }
}

void save_image(const RgbImage& img, const fs::path& path) {
  if (!wants_png(path)) {
    const std::string header =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    write_bytes(path, header, img.data);
    return;
  }
  write_png(path, img.width, img.height, true, img.data);
}

}  // namespace sbm
