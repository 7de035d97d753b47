#pragma once

#include "pnpmri/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pnpmri {

struct GrayImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels; // row-major
};

void write_png(const std::filesystem::path &path, const GrayImage &img);
GrayImage read_png(const std::filesystem::path &path);

/// Magnitudes mapped to 0..255 by round(255·v/scale), clipped.
GrayImage to_gray(std::span<const double> values, std::size_t width, std::size_t height, double scale);

/// All frames side by side in a grid of ceil(sqrt(nt)) columns, scaled by
/// the largest magnitude in the image.
GrayImage magnitude_montage(const ComplexImage &x);

/// |reference − estimate| amplified `gain` times, on the reference's scale.
GrayImage error_montage(const ComplexImage &reference, const ComplexImage &estimate, double gain = 5.0);

/// Row `y` of every frame stacked vertically: width nx, height nt.
GrayImage temporal_profile(const ComplexImage &x, std::size_t y);

} // namespace pnpmri
