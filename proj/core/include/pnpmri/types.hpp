#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pnpmri {

using cplx = std::complex<double>;

/// Grid extents of a cine volume. Storage is x fastest, then y, then t.
struct ImageShape {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nt = 0;

  std::size_t size() const { return nx * ny * nt; }
  std::size_t frame_size() const { return nx * ny; }
  friend bool operator==(const ImageShape &, const ImageShape &) = default;
};

/// Extents of multi-coil k-space. Storage is kx fastest, then ky, then t,
/// with the coil index outermost.
struct KSpaceShape {
  std::size_t nc = 0;
  std::size_t nkx = 0;
  std::size_t nky = 0;
  std::size_t nt = 0;

  std::size_t size() const { return nc * nkx * nky * nt; }
  std::size_t coil_size() const { return nkx * nky * nt; }
  std::size_t frame_size() const { return nkx * nky; }
  friend bool operator==(const KSpaceShape &, const KSpaceShape &) = default;
};

/// Complex cine volume x(x, y, t).
class ComplexImage {
public:
  ComplexImage() = default;
  explicit ComplexImage(ImageShape shape);
  ComplexImage(std::size_t nx, std::size_t ny, std::size_t nt);
  ComplexImage(ImageShape shape, std::vector<cplx> data);

  const ImageShape &shape() const { return shape_; }
  std::size_t nx() const { return shape_.nx; }
  std::size_t ny() const { return shape_.ny; }
  std::size_t nt() const { return shape_.nt; }
  std::size_t size() const { return data_.size(); }

  std::span<cplx> values() { return data_; }
  std::span<const cplx> values() const { return data_; }

  std::span<cplx> frame(std::size_t t) {
    return std::span<cplx>(data_).subspan(t * shape_.frame_size(), shape_.frame_size());
  }
  std::span<const cplx> frame(std::size_t t) const {
    return std::span<const cplx>(data_).subspan(t * shape_.frame_size(), shape_.frame_size());
  }

  cplx &operator()(std::size_t x, std::size_t y, std::size_t t) {
    return data_[x + shape_.nx * (y + shape_.ny * t)];
  }
  const cplx &operator()(std::size_t x, std::size_t y, std::size_t t) const {
    return data_[x + shape_.nx * (y + shape_.ny * t)];
  }
  cplx &operator[](std::size_t i) { return data_[i]; }
  const cplx &operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const ComplexImage &other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  ComplexImage &operator+=(const ComplexImage &rhs);
  ComplexImage &operator-=(const ComplexImage &rhs);
  ComplexImage &operator*=(cplx alpha);

  friend ComplexImage operator+(ComplexImage lhs, const ComplexImage &rhs) { return lhs += rhs; }
  friend ComplexImage operator-(ComplexImage lhs, const ComplexImage &rhs) { return lhs -= rhs; }
  friend ComplexImage operator*(cplx alpha, ComplexImage rhs) { return rhs *= alpha; }
  friend bool operator==(const ComplexImage &, const ComplexImage &) = default;

private:
  ImageShape shape_{};
  std::vector<cplx> data_;
};

/// Multi-coil k-space d(coil, kx, ky, t).
class MultiCoilKSpace {
public:
  MultiCoilKSpace() = default;
  explicit MultiCoilKSpace(KSpaceShape shape);
  MultiCoilKSpace(KSpaceShape shape, std::vector<cplx> data);

  const KSpaceShape &shape() const { return shape_; }
  std::size_t nc() const { return shape_.nc; }
  std::size_t nkx() const { return shape_.nkx; }
  std::size_t nky() const { return shape_.nky; }
  std::size_t nt() const { return shape_.nt; }
  std::size_t size() const { return data_.size(); }

  std::span<cplx> values() { return data_; }
  std::span<const cplx> values() const { return data_; }

  std::span<cplx> frame(std::size_t c, std::size_t t) {
    return std::span<cplx>(data_).subspan(c * shape_.coil_size() + t * shape_.frame_size(),
                                          shape_.frame_size());
  }
  std::span<const cplx> frame(std::size_t c, std::size_t t) const {
    return std::span<const cplx>(data_).subspan(c * shape_.coil_size() + t * shape_.frame_size(),
                                                shape_.frame_size());
  }

  cplx &operator()(std::size_t c, std::size_t kx, std::size_t ky, std::size_t t) {
    return data_[kx + shape_.nkx * (ky + shape_.nky * (t + shape_.nt * c))];
  }
  const cplx &operator()(std::size_t c, std::size_t kx, std::size_t ky, std::size_t t) const {
    return data_[kx + shape_.nkx * (ky + shape_.nky * (t + shape_.nt * c))];
  }

  bool same_shape(const MultiCoilKSpace &other) const { return shape_ == other.shape_; }

  MultiCoilKSpace &operator+=(const MultiCoilKSpace &rhs);
  MultiCoilKSpace &operator-=(const MultiCoilKSpace &rhs);
  MultiCoilKSpace &operator*=(cplx alpha);
  friend MultiCoilKSpace operator-(MultiCoilKSpace lhs, const MultiCoilKSpace &rhs) { return lhs -= rhs; }
  friend bool operator==(const MultiCoilKSpace &, const MultiCoilKSpace &) = default;

private:
  KSpaceShape shape_{};
  std::vector<cplx> data_;
};

/// Binary sampling pattern kept(kx, ky, t), kx fastest.
class SamplingMask {
public:
  SamplingMask() = default;
  SamplingMask(std::size_t nkx, std::size_t nky, std::size_t nt, double r_nominal = 1.0);
  SamplingMask(std::size_t nkx, std::size_t nky, std::size_t nt, std::vector<std::uint8_t> kept,
               double r_nominal);

  std::size_t nkx() const { return nkx_; }
  std::size_t nky() const { return nky_; }
  std::size_t nt() const { return nt_; }
  std::size_t size() const { return kept_.size(); }
  double r_nominal() const { return r_nominal_; }

  bool operator()(std::size_t kx, std::size_t ky, std::size_t t) const {
    return kept_[kx + nkx_ * (ky + nky_ * t)] != 0;
  }
  void set(std::size_t kx, std::size_t ky, std::size_t t, bool value) {
    kept_[kx + nkx_ * (ky + nky_ * t)] = value ? 1 : 0;
  }
  std::span<const std::uint8_t> frame(std::size_t t) const {
    return std::span<const std::uint8_t>(kept_).subspan(t * nkx_ * nky_, nkx_ * nky_);
  }
  std::span<const std::uint8_t> values() const { return kept_; }

  /// Number of kept entries.
  std::size_t count() const;
  /// True when any kx sample on line (ky, t) is kept.
  bool line_kept(std::size_t ky, std::size_t t) const;

  friend bool operator==(const SamplingMask &, const SamplingMask &) = default;

private:
  std::size_t nkx_ = 0, nky_ = 0, nt_ = 0;
  std::vector<std::uint8_t> kept_;
  double r_nominal_ = 1.0;
};

/// Time-invariant coil sensitivities S_c(x, y), x fastest, coil outermost.
class SensitivityMaps {
public:
  SensitivityMaps() = default;
  SensitivityMaps(std::size_t nc, std::size_t nx, std::size_t ny);
  SensitivityMaps(std::size_t nc, std::size_t nx, std::size_t ny, std::vector<cplx> maps);

  std::size_t nc() const { return nc_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  std::span<cplx> coil(std::size_t c) { return std::span<cplx>(maps_).subspan(c * nx_ * ny_, nx_ * ny_); }
  std::span<const cplx> coil(std::size_t c) const {
    return std::span<const cplx>(maps_).subspan(c * nx_ * ny_, nx_ * ny_);
  }
  cplx &operator()(std::size_t c, std::size_t x, std::size_t y) { return maps_[x + nx_ * (y + ny_ * c)]; }
  const cplx &operator()(std::size_t c, std::size_t x, std::size_t y) const {
    return maps_[x + nx_ * (y + ny_ * c)];
  }
  std::span<const cplx> values() const { return maps_; }
  std::span<cplx> values() { return maps_; }

  /// Rescale every pixel's coil vector to unit l2 norm; zero vectors stay zero.
  void normalize();

  friend bool operator==(const SensitivityMaps &, const SensitivityMaps &) = default;

private:
  std::size_t nc_ = 0, nx_ = 0, ny_ = 0;
  std::vector<cplx> maps_;
};

} // namespace pnpmri
