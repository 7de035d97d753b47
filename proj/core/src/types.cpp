#include "pnpmri/types.hpp"

#include "pnpmri/errors.hpp"

#include <cmath>
#include <string>

namespace pnpmri {

namespace {

void require_positive(std::size_t n, const char *what) {
  if (n == 0) {
    throw DimensionError(std::string(what) + " must be positive");
  }
}

} // namespace

ComplexImage::ComplexImage(ImageShape shape) : shape_(shape), data_(shape.size()) {
  require_positive(shape.nx, "nx");
  require_positive(shape.ny, "ny");
  require_positive(shape.nt, "nt");
}

ComplexImage::ComplexImage(std::size_t nx, std::size_t ny, std::size_t nt)
    : ComplexImage(ImageShape{nx, ny, nt}) {}

ComplexImage::ComplexImage(ImageShape shape, std::vector<cplx> data) : shape_(shape), data_(std::move(data)) {
  require_positive(shape.nx, "nx");
  require_positive(shape.ny, "ny");
  require_positive(shape.nt, "nt");
  if (data_.size() != shape.size()) {
    throw DimensionError("image data length " + std::to_string(data_.size()) + " != nx*ny*nt = " +
                         std::to_string(shape.size()));
  }
}

bool ComplexImage::all_finite() const {
  for (const auto &v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      return false;
    }
  }
  return true;
}

ComplexImage &ComplexImage::operator+=(const ComplexImage &rhs) {
  if (!same_shape(rhs)) {
    throw DimensionError("image shape mismatch in +=");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += rhs.data_[i];
  }
  return *this;
}

ComplexImage &ComplexImage::operator-=(const ComplexImage &rhs) {
  if (!same_shape(rhs)) {
    throw DimensionError("image shape mismatch in -=");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] -= rhs.data_[i];
  }
  return *this;
}

ComplexImage &ComplexImage::operator*=(cplx alpha) {
  for (auto &v : data_) {
    v *= alpha;
  }
  return *this;
}

MultiCoilKSpace::MultiCoilKSpace(KSpaceShape shape) : shape_(shape), data_(shape.size()) {
  require_positive(shape.nc, "nc");
  require_positive(shape.nkx, "nkx");
  require_positive(shape.nky, "nky");
  require_positive(shape.nt, "nt");
}

MultiCoilKSpace::MultiCoilKSpace(KSpaceShape shape, std::vector<cplx> data)
    : shape_(shape), data_(std::move(data)) {
  require_positive(shape.nc, "nc");
  require_positive(shape.nkx, "nkx");
  require_positive(shape.nky, "nky");
  require_positive(shape.nt, "nt");
  if (data_.size() != shape.size()) {
    throw DimensionError("k-space data length " + std::to_string(data_.size()) +
                         " != nc*nkx*nky*nt = " + std::to_string(shape.size()));
  }
}

MultiCoilKSpace &MultiCoilKSpace::operator+=(const MultiCoilKSpace &rhs) {
  if (!same_shape(rhs)) {
    throw DimensionError("k-space shape mismatch in +=");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += rhs.data_[i];
  }
  return *this;
}

MultiCoilKSpace &MultiCoilKSpace::operator-=(const MultiCoilKSpace &rhs) {
  if (!same_shape(rhs)) {
    throw DimensionError("k-space shape mismatch in -=");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] -= rhs.data_[i];
  }
  return *this;
}

MultiCoilKSpace &MultiCoilKSpace::operator*=(cplx alpha) {
  for (auto &v : data_) {
    v *= alpha;
  }
  return *this;
}

SamplingMask::SamplingMask(std::size_t nkx, std::size_t nky, std::size_t nt, double r_nominal)
    : nkx_(nkx), nky_(nky), nt_(nt), kept_(nkx * nky * nt, 0), r_nominal_(r_nominal) {
  require_positive(nkx, "nkx");
  require_positive(nky, "nky");
  require_positive(nt, "nt");
}

SamplingMask::SamplingMask(std::size_t nkx, std::size_t nky, std::size_t nt, std::vector<std::uint8_t> kept,
                           double r_nominal)
    : nkx_(nkx), nky_(nky), nt_(nt), kept_(std::move(kept)), r_nominal_(r_nominal) {
  require_positive(nkx, "nkx");
  require_positive(nky, "nky");
  require_positive(nt, "nt");
  if (kept_.size() != nkx * nky * nt) {
    throw DimensionError("mask length does not match nkx*nky*nt");
  }
  for (auto &k : kept_) {
    k = k ? 1 : 0;
  }
}

std::size_t SamplingMask::count() const {
  std::size_t n = 0;
  for (auto k : kept_) {
    n += k;
  }
  return n;
}

bool SamplingMask::line_kept(std::size_t ky, std::size_t t) const {
  for (std::size_t kx = 0; kx < nkx_; ++kx) {
    if ((*this)(kx, ky, t)) {
      return true;
    }
  }
  return false;
}

SensitivityMaps::SensitivityMaps(std::size_t nc, std::size_t nx, std::size_t ny)
    : nc_(nc), nx_(nx), ny_(ny), maps_(nc * nx * ny) {
  require_positive(nc, "nc");
  require_positive(nx, "nx");
  require_positive(ny, "ny");
}

SensitivityMaps::SensitivityMaps(std::size_t nc, std::size_t nx, std::size_t ny, std::vector<cplx> maps)
    : nc_(nc), nx_(nx), ny_(ny), maps_(std::move(maps)) {
  require_positive(nc, "nc");
  require_positive(nx, "nx");
  require_positive(ny, "ny");
  if (maps_.size() != nc * nx * ny) {
    throw DimensionError("sensitivity map length does not match nc*nx*ny");
  }
}

void SensitivityMaps::normalize() {
  const std::size_t npix = nx_ * ny_;
  for (std::size_t p = 0; p < npix; ++p) {
    double ss = 0.0;
    for (std::size_t c = 0; c < nc_; ++c) {
      ss += std::norm(maps_[p + c * npix]);
    }
    if (ss == 0.0) {
      continue;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t c = 0; c < nc_; ++c) {
      maps_[p + c * npix] *= inv;
    }
  }
}

} // namespace pnpmri
