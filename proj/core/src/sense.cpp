#include "pnpmri/sense.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/fft.hpp"

#include <vector>

namespace pnpmri {

SenseModel::SenseModel(SensitivityMaps maps, SamplingMask mask) : maps_(std::move(maps)), mask_(std::move(mask)) {
  if (maps_.nx() != mask_.nkx() || maps_.ny() != mask_.nky()) {
    throw DimensionError("SENSE model: map grid does not match mask grid");
  }
}

namespace {

void check_image(const ComplexImage &x, const SenseModel &model) {
  if (!(x.shape() == model.image_shape())) {
    throw DimensionError("SENSE model: image shape mismatch");
  }
}

void check_kspace(const MultiCoilKSpace &y, const SenseModel &model) {
  if (!(y.shape() == model.kspace_shape())) {
    throw DimensionError("SENSE model: k-space shape mismatch");
  }
}

void mask_frame(std::span<cplx> k, std::span<const std::uint8_t> m) {
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!m[i]) {
      k[i] = 0.0;
    }
  }
}

} // namespace

MultiCoilKSpace sense_forward(const ComplexImage &x, const SenseModel &model) {
  check_image(x, model);
  const auto &maps = model.maps();
  const std::size_t nx = x.nx(), ny = x.ny();
  MultiCoilKSpace y(model.kspace_shape());
  std::vector<cplx> buf(nx * ny);
  for (std::size_t c = 0; c < maps.nc(); ++c) {
    auto s = maps.coil(c);
    for (std::size_t t = 0; t < x.nt(); ++t) {
      auto xt = x.frame(t);
      for (std::size_t p = 0; p < buf.size(); ++p) {
        buf[p] = s[p] * xt[p];
      }
      auto out = y.frame(c, t);
      fft2c(buf, out, nx, ny);
      mask_frame(out, model.mask().frame(t));
    }
  }
  return y;
}

ComplexImage sense_adjoint(const MultiCoilKSpace &y, const SenseModel &model) {
  check_kspace(y, model);
  const auto &maps = model.maps();
  const std::size_t nx = y.nkx(), ny = y.nky();
  ComplexImage x(model.image_shape());
  std::vector<cplx> buf(nx * ny);
  for (std::size_t c = 0; c < maps.nc(); ++c) {
    auto s = maps.coil(c);
    for (std::size_t t = 0; t < y.nt(); ++t) {
      auto in = y.frame(c, t);
      std::copy(in.begin(), in.end(), buf.begin());
      mask_frame(buf, model.mask().frame(t));
      ifft2c(buf, buf, nx, ny);
      auto xt = x.frame(t);
      for (std::size_t p = 0; p < buf.size(); ++p) {
        xt[p] += std::conj(s[p]) * buf[p];
      }
    }
  }
  return x;
}

ComplexImage sense_gram(const ComplexImage &x, const SenseModel &model) {
  check_image(x, model);
  const auto &maps = model.maps();
  const std::size_t nx = x.nx(), ny = x.ny();
  ComplexImage out(x.shape());
  std::vector<cplx> buf(nx * ny);
  for (std::size_t c = 0; c < maps.nc(); ++c) {
    auto s = maps.coil(c);
    for (std::size_t t = 0; t < x.nt(); ++t) {
      auto xt = x.frame(t);
      for (std::size_t p = 0; p < buf.size(); ++p) {
        buf[p] = s[p] * xt[p];
      }
      fft2c(buf, buf, nx, ny);
      mask_frame(buf, model.mask().frame(t));
      ifft2c(buf, buf, nx, ny);
      auto ot = out.frame(t);
      for (std::size_t p = 0; p < buf.size(); ++p) {
        ot[p] += std::conj(s[p]) * buf[p];
      }
    }
  }
  return out;
}

double data_fidelity(const ComplexImage &x, const MultiCoilKSpace &d, const SenseModel &model) {
  check_kspace(d, model);
  const MultiCoilKSpace ax = sense_forward(x, model);
  double ss = 0.0;
  auto a = ax.values();
  auto b = d.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ss += std::norm(a[i] - b[i]);
  }
  return 0.5 * ss;
}

void apply_mask(MultiCoilKSpace &y, const SamplingMask &mask) {
  if (y.nkx() != mask.nkx() || y.nky() != mask.nky() || y.nt() != mask.nt()) {
    throw DimensionError("apply_mask: shape mismatch");
  }
  for (std::size_t c = 0; c < y.nc(); ++c) {
    for (std::size_t t = 0; t < y.nt(); ++t) {
      mask_frame(y.frame(c, t), mask.frame(t));
    }
  }
}

std::vector<ComplexImage> coil_images(const MultiCoilKSpace &y) {
  std::vector<ComplexImage> out;
  out.reserve(y.nc());
  for (std::size_t c = 0; c < y.nc(); ++c) {
    ComplexImage img(y.nkx(), y.nky(), y.nt());
    for (std::size_t t = 0; t < y.nt(); ++t) {
      ifft2c(y.frame(c, t), img.frame(t), y.nkx(), y.nky());
    }
    out.push_back(std::move(img));
  }
  return out;
}

} // namespace pnpmri
