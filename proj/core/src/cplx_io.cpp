#include "pnpmri/cplx_io.hpp"

#include "pnpmri/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pnpmri {

namespace {

void put_u32(std::vector<char> &out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) {
    out.push_back(char(std::uint8_t(v >> (8 * k))));
  }
}

std::uint32_t get_u32(const std::vector<char> &in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= std::uint32_t(std::uint8_t(in[pos + k])) << (8 * k);
  }
  return v;
}

std::size_t product(const std::vector<std::uint32_t> &dims) {
  std::size_t n = 1;
  for (auto d : dims) {
    n *= d;
  }
  return n;
}

void expect_ndim(const CplxArray &a, std::size_t ndim, const std::filesystem::path &path) {
  if (a.dims.size() != ndim) {
    throw FormatError(path.string() + ": expected " + std::to_string(ndim) + " dimensions, found " +
                      std::to_string(a.dims.size()));
  }
}

} // namespace

void write_cplx(const std::filesystem::path &path, const CplxArray &array) {
  if (product(array.dims) != array.data.size()) {
    throw DimensionError("write_cplx: dims do not match payload length");
  }
  std::vector<char> out;
  out.reserve(12 + 4 * array.dims.size() + 8 * array.data.size());
  out.insert(out.end(), {'C', 'P', 'L', 'X'});
  put_u32(out, kCplxVersion);
  put_u32(out, std::uint32_t(array.dims.size()));
  for (auto d : array.dims) {
    put_u32(out, d);
  }
  for (const auto &z : array.data) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) {
    throw FormatError("cannot write " + path.string());
  }
}

CplxArray read_cplx(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw FormatError("cannot open " + path.string());
  }
  const std::vector<char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string &why) { return FormatError(path.string() + ": " + why); };
  if (in.size() < 12 || std::memcmp(in.data(), "CPLX", 4) != 0) {
    throw fail("not a CPLX file");
  }
  if (get_u32(in, 4) != kCplxVersion) {
    throw fail("unsupported CPLX version");
  }
  const std::uint32_t ndim = get_u32(in, 8);
  if (ndim == 0 || ndim > 8 || in.size() < 12 + 4 * std::size_t(ndim)) {
    throw fail("bad dimension header");
  }
  CplxArray a;
  for (std::uint32_t k = 0; k < ndim; ++k) {
    a.dims.push_back(get_u32(in, 12 + 4 * k));
  }
  const std::size_t n = product(a.dims);
  const std::size_t offset = 12 + 4 * std::size_t(ndim);
  if (in.size() - offset != 8 * n) {
    throw fail("payload length does not match dims");
  }
  a.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float re = std::bit_cast<float>(get_u32(in, offset + 8 * i));
    const float im = std::bit_cast<float>(get_u32(in, offset + 8 * i + 4));
    a.data[i] = cplx(re, im);
  }
  return a;
}

void write_image(const std::filesystem::path &path, const ComplexImage &x) {
  CplxArray a{{std::uint32_t(x.nx()), std::uint32_t(x.ny()), std::uint32_t(x.nt())},
              {x.values().begin(), x.values().end()}};
  write_cplx(path, a);
}

ComplexImage read_image(const std::filesystem::path &path) {
  auto a = read_cplx(path);
  expect_ndim(a, 3, path);
  return ComplexImage(ImageShape{a.dims[0], a.dims[1], a.dims[2]}, std::move(a.data));
}

void write_kspace(const std::filesystem::path &path, const MultiCoilKSpace &y) {
  CplxArray a{{std::uint32_t(y.nkx()), std::uint32_t(y.nky()), std::uint32_t(y.nt()), std::uint32_t(y.nc())},
              {y.values().begin(), y.values().end()}};
  write_cplx(path, a);
}

MultiCoilKSpace read_kspace(const std::filesystem::path &path) {
  auto a = read_cplx(path);
  expect_ndim(a, 4, path);
  return MultiCoilKSpace(KSpaceShape{a.dims[3], a.dims[0], a.dims[1], a.dims[2]}, std::move(a.data));
}

void write_maps(const std::filesystem::path &path, const SensitivityMaps &maps) {
  CplxArray a{{std::uint32_t(maps.nx()), std::uint32_t(maps.ny()), std::uint32_t(maps.nc())},
              {maps.values().begin(), maps.values().end()}};
  write_cplx(path, a);
}

SensitivityMaps read_maps(const std::filesystem::path &path) {
  auto a = read_cplx(path);
  expect_ndim(a, 3, path);
  return SensitivityMaps(a.dims[2], a.dims[0], a.dims[1], std::move(a.data));
}

void write_mask(const std::filesystem::path &path, const SamplingMask &mask) {
  CplxArray a{{std::uint32_t(mask.nkx()), std::uint32_t(mask.nky()), std::uint32_t(mask.nt())}, {}};
  a.data.reserve(mask.size());
  for (auto v : mask.values()) {
    a.data.emplace_back(v ? 1.0 : 0.0, 0.0);
  }
  write_cplx(path, a);
}

SamplingMask read_mask(const std::filesystem::path &path) {
  const auto a = read_cplx(path);
  expect_ndim(a, 3, path);
  std::vector<std::uint8_t> kept(a.data.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const cplx v = a.data[i];
    if (v.imag() != 0.0 || (v.real() != 0.0 && v.real() != 1.0)) {
      throw FormatError(path.string() + ": mask entries must be 0 or 1");
    }
    kept[i] = v.real() == 1.0;
  }
  SamplingMask mask(a.dims[0], a.dims[1], a.dims[2], std::move(kept), 1.0);
  std::size_t lines = 0;
  for (std::size_t t = 0; t < mask.nt(); ++t) {
    for (std::size_t ky = 0; ky < mask.nky(); ++ky) {
      lines += mask.line_kept(ky, t);
    }
  }
  const double r = lines == 0 ? 0.0 : double(mask.nky() * mask.nt()) / double(lines);
  return SamplingMask(mask.nkx(), mask.nky(), mask.nt(), {mask.values().begin(), mask.values().end()}, r);
}

} // namespace pnpmri
