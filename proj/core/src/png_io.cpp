#include "pnpmri/png_io.hpp"

#include "pnpmri/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

namespace pnpmri {

namespace {

struct FileCloser {
  void operator()(std::FILE *f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto *what = static_cast<std::string *>(png_get_error_ptr(png));
  *what = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

double max_magnitude(const ComplexImage &x) {
  double m = 0.0;
  for (const auto &v : x.values()) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

GrayImage montage_of(const std::vector<double> &mag, const ImageShape &s, double scale) {
  const std::size_t cols = std::size_t(std::ceil(std::sqrt(double(s.nt))));
  const std::size_t rows = (s.nt + cols - 1) / cols;
  GrayImage out{cols * s.nx, rows * s.ny, {}};
  out.pixels.assign(out.width * out.height, 0);
  const GrayImage frames = to_gray(mag, s.nx, s.ny * s.nt, scale);
  for (std::size_t t = 0; t < s.nt; ++t) {
    const std::size_t ox = (t % cols) * s.nx, oy = (t / cols) * s.ny;
    for (std::size_t y = 0; y < s.ny; ++y) {
      const auto *src = frames.pixels.data() + (t * s.ny + y) * s.nx;
      std::copy(src, src + s.nx, out.pixels.begin() + std::ptrdiff_t((oy + y) * out.width + ox));
    }
  }
  return out;
}

} // namespace

void write_png(const std::filesystem::path &path, const GrayImage &img) {
  if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height) {
    throw DimensionError("write_png: bad image dimensions");
  }
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) {
    throw FormatError("cannot write " + path.string());
  }
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("png write failed for " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < img.height; ++y) {
    png_write_row(png, img.pixels.data() + y * img.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const std::filesystem::path &path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) {
    throw FormatError("cannot open " + path.string());
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  GrayImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png read failed for " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": only 8-bit grayscale PNG is supported");
  }
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.pixels.resize(img.width * img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    png_read_row(png, img.pixels.data() + y * img.width, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

GrayImage to_gray(std::span<const double> values, std::size_t width, std::size_t height, double scale) {
  if (values.size() != width * height) {
    throw DimensionError("to_gray: value count does not match width*height");
  }
  GrayImage out{width, height, std::vector<std::uint8_t>(values.size(), 0)};
  if (!(scale > 0.0)) {
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(255.0 * values[i] / scale, 0.0, 255.0);
    out.pixels[i] = std::uint8_t(std::lround(v));
  }
  return out;
}

GrayImage magnitude_montage(const ComplexImage &x) {
  std::vector<double> mag(x.size());
  std::transform(x.values().begin(), x.values().end(), mag.begin(), [](cplx v) { return std::abs(v); });
  return montage_of(mag, x.shape(), max_magnitude(x));
}

GrayImage error_montage(const ComplexImage &reference, const ComplexImage &estimate, double gain) {
  if (!reference.same_shape(estimate)) {
    throw DimensionError("error_montage: shapes differ");
  }
  std::vector<double> mag(reference.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    mag[i] = gain * std::abs(reference[i] - estimate[i]);
  }
  return montage_of(mag, reference.shape(), max_magnitude(reference));
}

GrayImage temporal_profile(const ComplexImage &x, std::size_t y) {
  if (y >= x.ny()) {
    throw DimensionError("temporal_profile: row out of range");
  }
  std::vector<double> mag(x.nx() * x.nt());
  double peak = 0.0;
  for (std::size_t t = 0; t < x.nt(); ++t) {
    for (std::size_t xi = 0; xi < x.nx(); ++xi) {
      mag[t * x.nx() + xi] = std::abs(x(xi, y, t));
      peak = std::max(peak, mag[t * x.nx() + xi]);
    }
  }
  return to_gray(mag, x.nx(), x.nt(), peak);
}

} // namespace pnpmri
