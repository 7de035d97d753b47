#pragma once

#include "pnpmri/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pnpmri {

// CPLX container, little-endian:
//
//   char[4] "CPLX"
//   u32     version (1)
//   u32     ndim
//   u32     dims[ndim], fastest-varying first
//   f32     payload[2 · prod(dims)], interleaved real, imaginary
//
// Images are (nx, ny, nt); k-space is (nkx, nky, nt, nc); sensitivity maps
// are (nx, ny, nc); masks are (nkx, nky, nt) with values 0 or 1.

inline constexpr std::uint32_t kCplxVersion = 1;

struct CplxArray {
  std::vector<std::uint32_t> dims;
  std::vector<cplx> data;
};

void write_cplx(const std::filesystem::path &path, const CplxArray &array);
CplxArray read_cplx(const std::filesystem::path &path);

void write_image(const std::filesystem::path &path, const ComplexImage &x);
ComplexImage read_image(const std::filesystem::path &path);

void write_kspace(const std::filesystem::path &path, const MultiCoilKSpace &y);
MultiCoilKSpace read_kspace(const std::filesystem::path &path);

void write_maps(const std::filesystem::path &path, const SensitivityMaps &maps);
SensitivityMaps read_maps(const std::filesystem::path &path);

/// The nominal acceleration is not stored; on read it is recomputed from
/// the kept phase-encode lines.
void write_mask(const std::filesystem::path &path, const SamplingMask &mask);
SamplingMask read_mask(const std::filesystem::path &path);

} // namespace pnpmri
