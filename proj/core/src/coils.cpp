#include "pnpmri/coils.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/phantom.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pnpmri {

CoilCompression coil_compress(const MultiCoilKSpace &y, std::size_t n_virtual) {
  const std::size_t nc = y.nc();
  if (n_virtual == 0 || n_virtual > nc) {
    throw DimensionError("coil_compress: n_virtual must lie in [1, nc]");
  }
  const std::size_t m = y.shape().coil_size();
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Y(y.values().data(),
                                                                                           Eigen::Index(nc),
                                                                                           Eigen::Index(m));
  const Eigen::MatrixXcd gram = Y * Y.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("coil_compress: eigen-decomposition failed");
  }

  CoilCompression out;
  out.basis.resize(Eigen::Index(nc), Eigen::Index(n_virtual));
  double total = 0.0, kept = 0.0;
  for (std::size_t k = 0; k < nc; ++k) {
    const Eigen::Index col = Eigen::Index(nc - 1 - k);
    const double lambda = std::max(eig.eigenvalues()(col), 0.0);
    out.singular_values.push_back(std::sqrt(lambda));
    total += lambda;
    if (k < n_virtual) {
      kept += lambda;
      out.basis.col(Eigen::Index(k)) = eig.eigenvectors().col(col);
    }
  }
  out.energy_retained = total > 0.0 ? kept / total : 1.0;

  KSpaceShape shape = y.shape();
  shape.nc = n_virtual;
  std::vector<cplx> data(shape.size());
  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(data.data(),
                                                                                     Eigen::Index(n_virtual),
                                                                                     Eigen::Index(m));
  V.noalias() = out.basis.adjoint() * Y;
  out.data = MultiCoilKSpace(shape, std::move(data));
  return out;
}

SensitivityMaps compress_maps(const SensitivityMaps &maps, const Eigen::MatrixXcd &basis) {
  if (std::size_t(basis.rows()) != maps.nc()) {
    throw DimensionError("compress_maps: basis rows must equal coil count");
  }
  const std::size_t nv = std::size_t(basis.cols());
  const std::size_t npix = maps.nx() * maps.ny();
  SensitivityMaps out(nv, maps.nx(), maps.ny());
  for (std::size_t v = 0; v < nv; ++v) {
    auto dst = out.coil(v);
    for (std::size_t c = 0; c < maps.nc(); ++c) {
      const cplx w = std::conj(basis(Eigen::Index(c), Eigen::Index(v)));
      auto src = maps.coil(c);
      for (std::size_t p = 0; p < npix; ++p) {
        dst[p] += w * src[p];
      }
    }
  }
  return out;
}

WalshEstimate estimate_maps_walsh(std::span<const ComplexImage> coil_images, std::size_t block) {
  if (coil_images.empty()) {
    throw DimensionError("estimate_maps_walsh: no coil images");
  }
  const std::size_t nc = coil_images.size();
  const std::size_t nx = coil_images[0].nx(), ny = coil_images[0].ny();
  if (block == 0 || block % 2 == 0 || block > std::min(nx, ny)) {
    throw ParameterError("estimate_maps_walsh: block must be odd and no larger than the grid");
  }
  std::vector<ComplexImage> avg;
  avg.reserve(nc);
  for (const auto &img : coil_images) {
    if (img.nx() != nx || img.ny() != ny) {
      throw DimensionError("estimate_maps_walsh: coil images differ in shape");
    }
    avg.push_back(img.nt() == 1 ? img : temporal_mean(img));
  }

  const std::size_t npix = nx * ny;
  const std::size_t nn = nc * nc;
  // Per-pixel outer products, then a separable box sum over the block.
  std::vector<cplx> outer(npix * nn);
  for (std::size_t p = 0; p < npix; ++p) {
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nc; ++j) {
        outer[p * nn + i * nc + j] = avg[i][p] * std::conj(avg[j][p]);
      }
    }
  }
  const long half = long(block / 2);
  std::vector<cplx> rows(npix * nn);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      cplx *dst = &rows[(x + nx * y) * nn];
      for (long dx = -half; dx <= half; ++dx) {
        const long sx = long(x) + dx;
        if (sx < 0 || sx >= long(nx)) {
          continue;
        }
        const cplx *src = &outer[(std::size_t(sx) + nx * y) * nn];
        for (std::size_t k = 0; k < nn; ++k) {
          dst[k] += src[k];
        }
      }
    }
  }

  WalshEstimate result{SensitivityMaps(nc, nx, ny), 0};
  Eigen::MatrixXcd cov{Eigen::Index(nc), Eigen::Index(nc)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      cov.setZero();
      for (long dy = -half; dy <= half; ++dy) {
        const long sy = long(y) + dy;
        if (sy < 0 || sy >= long(ny)) {
          continue;
        }
        const cplx *src = &rows[(x + nx * std::size_t(sy)) * nn];
        for (std::size_t i = 0; i < nc; ++i) {
          for (std::size_t j = 0; j < nc; ++j) {
            cov(Eigen::Index(i), Eigen::Index(j)) += src[i * nc + j];
          }
        }
      }
      if (cov.trace().real() <= 0.0) {
        ++result.flagged_pixels;
        continue;
      }
      eig.compute(cov);
      if (eig.info() != Eigen::Success) {
        throw NumericalError("estimate_maps_walsh: eigen-decomposition failed");
      }
      Eigen::VectorXcd v = eig.eigenvectors().col(Eigen::Index(nc - 1));
      const double vnorm = v.norm();
      for (Eigen::Index c = 0; c < v.size(); ++c) {
        const double mag = std::abs(v(c));
        if (mag > 1e-12 * vnorm) {
          v *= std::conj(v(c)) / mag;
          break;
        }
      }
      v /= v.norm();
      for (std::size_t c = 0; c < nc; ++c) {
        result.maps(c, x, y) = v(Eigen::Index(c));
      }
    }
  }
  return result;
}

MultiCoilKSpace time_average_sampled(const MultiCoilKSpace &y, const SamplingMask &mask) {
  if (y.nkx() != mask.nkx() || y.nky() != mask.nky() || y.nt() != mask.nt()) {
    throw DimensionError("time_average_sampled: shape mismatch");
  }
  const std::size_t nf = y.shape().frame_size();
  MultiCoilKSpace out(KSpaceShape{y.nc(), y.nkx(), y.nky(), 1});
  std::vector<std::size_t> hits(nf, 0);
  for (std::size_t t = 0; t < y.nt(); ++t) {
    auto m = mask.frame(t);
    for (std::size_t k = 0; k < nf; ++k) {
      hits[k] += m[k];
    }
  }
  for (std::size_t c = 0; c < y.nc(); ++c) {
    auto dst = out.frame(c, 0);
    for (std::size_t t = 0; t < y.nt(); ++t) {
      auto src = y.frame(c, t);
      auto m = mask.frame(t);
      for (std::size_t k = 0; k < nf; ++k) {
        if (m[k]) {
          dst[k] += src[k];
        }
      }
    }
    for (std::size_t k = 0; k < nf; ++k) {
      if (hits[k]) {
        dst[k] /= double(hits[k]);
      }
    }
  }
  return out;
}

ComplexImage coil_combine(std::span<const ComplexImage> coil_images, const SensitivityMaps &maps) {
  if (coil_images.size() != maps.nc()) {
    throw DimensionError("coil_combine: coil count mismatch");
  }
  const ImageShape shape = coil_images[0].shape();
  if (shape.nx != maps.nx() || shape.ny != maps.ny()) {
    throw DimensionError("coil_combine: map grid mismatch");
  }
  ComplexImage out(shape);
  const std::size_t npix = shape.frame_size();
  for (std::size_t c = 0; c < maps.nc(); ++c) {
    if (!(coil_images[c].shape() == shape)) {
      throw DimensionError("coil_combine: coil images differ in shape");
    }
    auto s = maps.coil(c);
    for (std::size_t t = 0; t < shape.nt; ++t) {
      auto src = coil_images[c].frame(t);
      auto dst = out.frame(t);
      for (std::size_t p = 0; p < npix; ++p) {
        dst[p] += std::conj(s[p]) * src[p];
      }
    }
  }
  return out;
}

} // namespace pnpmri
