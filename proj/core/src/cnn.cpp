#include "pnpmri/cnn.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace pnpmri {

namespace {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_layer(const ConvLayer3D &l, std::size_t index) {
  const std::string where = "layer " + std::to_string(index);
  if (l.out_ch == 0 || l.in_ch == 0) {
    throw DimensionError(where + ": channel counts must be positive");
  }
  if (l.kernel.size() != l.out_ch * l.in_ch * ConvLayer3D::kTaps) {
    throw DimensionError(where + ": kernel must be out_ch x in_ch x 3 x 3 x 3");
  }
  if (!l.bias.empty() && l.bias.size() != l.out_ch) {
    throw DimensionError(where + ": bias length must equal out_ch");
  }
  if (!(l.declared_spectral_norm > 0.0f)) {
    throw ParameterError(where + ": declared spectral norm must be positive");
  }
}

RowMatrixD kernel_matrix(const ConvLayer3D &layer) {
  RowMatrixD k(Eigen::Index(layer.out_ch), Eigen::Index(layer.in_ch * ConvLayer3D::kTaps));
  for (Eigen::Index r = 0; r < k.rows(); ++r) {
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      k(r, c) = layer.kernel[std::size_t(r * k.cols() + c)];
    }
  }
  return k;
}

std::size_t wrap(long i, std::size_t n) {
  const long m = long(n);
  return std::size_t(((i % m) + m) % m);
}

// cols(i·27 + tap, voxel) = in[i][t+dt−1][y+dy−1][x+dx−1] with periodic wrap.
RowMatrixD periodic_im2col(const ConvGrid &g, std::span<const double> in) {
  const std::size_t nv = g.voxels();
  RowMatrixD cols(Eigen::Index(g.channels * ConvLayer3D::kTaps), Eigen::Index(nv));
  for (std::size_t i = 0; i < g.channels; ++i) {
    const double *src = in.data() + i * nv;
    for (std::size_t dt = 0; dt < 3; ++dt) {
      for (std::size_t dy = 0; dy < 3; ++dy) {
        for (std::size_t dx = 0; dx < 3; ++dx) {
          double *row = cols.row(Eigen::Index(i * 27 + dt * 9 + dy * 3 + dx)).data();
          for (std::size_t t = 0; t < g.nt; ++t) {
            const std::size_t st = wrap(long(t + dt) - 1, g.nt);
            for (std::size_t y = 0; y < g.ny; ++y) {
              const std::size_t sy = wrap(long(y + dy) - 1, g.ny);
              for (std::size_t x = 0; x < g.nx; ++x) {
                const std::size_t sx = wrap(long(x + dx) - 1, g.nx);
                *row++ = src[(st * g.ny + sy) * g.nx + sx];
              }
            }
          }
        }
      }
    }
  }
  return cols;
}

void periodic_col2im(const ConvGrid &g, const RowMatrixD &cols, std::span<double> in) {
  const std::size_t nv = g.voxels();
  std::fill(in.begin(), in.end(), 0.0);
  for (std::size_t i = 0; i < g.channels; ++i) {
    double *dst = in.data() + i * nv;
    for (std::size_t dt = 0; dt < 3; ++dt) {
      for (std::size_t dy = 0; dy < 3; ++dy) {
        for (std::size_t dx = 0; dx < 3; ++dx) {
          const double *row = cols.row(Eigen::Index(i * 27 + dt * 9 + dy * 3 + dx)).data();
          for (std::size_t t = 0; t < g.nt; ++t) {
            const std::size_t st = wrap(long(t + dt) - 1, g.nt);
            for (std::size_t y = 0; y < g.ny; ++y) {
              const std::size_t sy = wrap(long(y + dy) - 1, g.ny);
              for (std::size_t x = 0; x < g.nx; ++x) {
                const std::size_t sx = wrap(long(x + dx) - 1, g.nx);
                dst[(st * g.ny + sy) * g.nx + sx] += *row++;
              }
            }
          }
        }
      }
    }
  }
}

void check_grid(const ConvLayer3D &layer, const ConvGrid &grid) {
  if (grid.channels != layer.in_ch) {
    throw DimensionError("convolution grid channels must equal the layer's in_ch");
  }
  if (grid.voxels() == 0) {
    throw DimensionError("convolution grid must be non-empty");
  }
}

} // namespace

DenoiserNet::DenoiserNet(std::vector<ConvLayer3D> layers, bool residual_mode, bool has_bias, NetMetadata meta)
    : layers_(std::move(layers)), residual_mode_(residual_mode), has_bias_(has_bias), meta_(meta) {
  if (layers_.empty()) {
    throw DimensionError("denoiser network needs at least one layer");
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    auto &l = layers_[k];
    if (!has_bias_) {
      l.bias.clear();
    } else if (l.bias.empty()) {
      l.bias.assign(l.out_ch, 0.0f);
    }
    check_layer(l, k);
    if (k > 0 && layers_[k - 1].out_ch != l.in_ch) {
      throw DimensionError("layer " + std::to_string(k) + ": in_ch does not match previous out_ch");
    }
  }
}

bool DenoiserNet::matches_reference_architecture() const {
  static constexpr std::size_t plan[] = {2, 64, 64, 64, 64, 2};
  if (layers_.size() != 5) {
    return false;
  }
  for (std::size_t k = 0; k < 5; ++k) {
    if (layers_[k].in_ch != plan[k] || layers_[k].out_ch != plan[k + 1]) {
      return false;
    }
  }
  return true;
}

std::vector<double> conv3d_periodic(const ConvLayer3D &layer, const ConvGrid &grid, std::span<const double> in) {
  check_grid(layer, grid);
  if (in.size() != layer.in_ch * grid.voxels()) {
    throw DimensionError("conv3d_periodic: input size mismatch");
  }
  const RowMatrixD k = kernel_matrix(layer);
  const RowMatrixD cols = periodic_im2col(grid, in);
  std::vector<double> out(layer.out_ch * grid.voxels());
  Eigen::Map<RowMatrixD>(out.data(), Eigen::Index(layer.out_ch), Eigen::Index(grid.voxels())).noalias() = k * cols;
  return out;
}

std::vector<double> conv3d_periodic_transpose(const ConvLayer3D &layer, const ConvGrid &grid,
                                              std::span<const double> out) {
  check_grid(layer, grid);
  if (out.size() != layer.out_ch * grid.voxels()) {
    throw DimensionError("conv3d_periodic_transpose: input size mismatch");
  }
  const RowMatrixD k = kernel_matrix(layer);
  const RowMatrixD cols =
      k.transpose() * Eigen::Map<const RowMatrixD>(out.data(), Eigen::Index(layer.out_ch), Eigen::Index(grid.voxels()));
  std::vector<double> in(layer.in_ch * grid.voxels());
  periodic_col2im(grid, cols, in);
  return in;
}

double spectral_norm_estimate(const ConvLayer3D &layer, const ConvGrid &grid, std::size_t power_iters) {
  check_grid(layer, grid);
  if (power_iters == 0) {
    throw ParameterError("spectral_norm_estimate: power_iters must be at least 1");
  }
  const std::size_t nv = grid.voxels();
  const RowMatrixD k = kernel_matrix(layer);
  if (k.cwiseAbs().maxCoeff() == 0.0) {
    return 0.0;
  }
  Rng rng(0x5eedULL);
  std::vector<double> v(layer.in_ch * nv);
  for (auto &e : v) {
    e = rng.normal();
  }
  Eigen::Map<Eigen::VectorXd> vv(v.data(), Eigen::Index(v.size()));
  vv.normalize();

  RowMatrixD w(Eigen::Index(layer.out_ch), Eigen::Index(nv));
  double sigma = 0.0;
  for (std::size_t it = 0; it < power_iters; ++it) {
    w.noalias() = k * periodic_im2col(grid, v);
    sigma = w.norm();
    if (sigma == 0.0) {
      return 0.0;
    }
    const RowMatrixD cols = k.transpose() * w;
    periodic_col2im(grid, cols, v);
    const double n = vv.norm();
    if (n == 0.0) {
      break;
    }
    vv /= n;
  }
  return sigma;
}

std::vector<float> net_forward(const DenoiserNet &net, std::span<const float> input, std::size_t nt, std::size_t ny,
                               std::size_t nx) {
  const std::size_t npix = nx * ny, nvox = npix * nt;
  const auto &layers = net.layers();
  if (input.size() != layers.front().in_ch * nvox) {
    throw DimensionError("net_forward: input tensor size mismatch");
  }
  // Activations live on a grid padded by one zero voxel on every side, so each
  // of the 27 taps is a fixed offset into the flattened array and a layer is a
  // sum of 27 small GEMMs over contiguous column ranges.
  const std::size_t px = nx + 2, py = ny + 2, pt = nt + 2;
  const std::size_t pv = px * py * pt;
  const auto padded = [&](std::size_t x, std::size_t y, std::size_t t) { return x + px * (y + py * t); };
  const std::size_t first = padded(1, 1, 1), last = padded(nx, ny, nt) + 1;
  std::vector<std::uint8_t> interior(pv, 0);
  for (std::size_t t = 1; t <= nt; ++t) {
    for (std::size_t y = 1; y <= ny; ++y) {
      std::fill_n(interior.begin() + std::ptrdiff_t(padded(1, y, t)), nx, std::uint8_t(1));
    }
  }

  RowMatrixF act = RowMatrixF::Zero(Eigen::Index(layers.front().in_ch), Eigen::Index(pv));
  for (std::size_t c = 0; c < layers.front().in_ch; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t y = 0; y < ny; ++y) {
        std::copy_n(input.data() + c * nvox + t * npix + y * nx, nx,
                    act.row(Eigen::Index(c)).data() + padded(1, y + 1, t + 1));
      }
    }
  }

  constexpr std::size_t kChunk = 1024;
  RowMatrixF next;
  std::vector<RowMatrixF> taps(ConvLayer3D::kTaps);
  std::array<std::ptrdiff_t, ConvLayer3D::kTaps> offsets{};
  for (std::size_t dt = 0; dt < 3; ++dt) {
    for (std::size_t dy = 0; dy < 3; ++dy) {
      for (std::size_t dx = 0; dx < 3; ++dx) {
        offsets[dt * 9 + dy * 3 + dx] =
            (std::ptrdiff_t(dt) - 1) * std::ptrdiff_t(px * py) + (std::ptrdiff_t(dy) - 1) * std::ptrdiff_t(px) +
            std::ptrdiff_t(dx) - 1;
      }
    }
  }
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto &layer = layers[li];
    const bool relu = li + 1 < layers.size();
    const Eigen::Index oc = Eigen::Index(layer.out_ch), ic = Eigen::Index(layer.in_ch);
    for (std::size_t k = 0; k < ConvLayer3D::kTaps; ++k) {
      taps[k].resize(oc, ic);
      for (Eigen::Index o = 0; o < oc; ++o) {
        for (Eigen::Index i = 0; i < ic; ++i) {
          taps[k](o, i) = layer.kernel[(std::size_t(o) * layer.in_ch + std::size_t(i)) * ConvLayer3D::kTaps + k];
        }
      }
    }
    next = RowMatrixF::Zero(oc, Eigen::Index(pv));
    for (std::size_t a = first; a < last; a += kChunk) {
      const Eigen::Index len = Eigen::Index(std::min(kChunk, last - a));
      auto out = next.middleCols(Eigen::Index(a), len);
      for (std::size_t k = 0; k < ConvLayer3D::kTaps; ++k) {
        out.noalias() += taps[k] * act.middleCols(Eigen::Index(std::ptrdiff_t(a) + offsets[k]), len);
      }
      for (Eigen::Index o = 0; o < oc; ++o) {
        float *row = out.row(o).data();
        const float b = layer.bias.empty() ? 0.0f : layer.bias[std::size_t(o)];
        for (Eigen::Index p = 0; p < len; ++p) {
          const float val = row[p] + b;
          row[p] = interior[a + std::size_t(p)] ? (relu ? std::max(val, 0.0f) : val) : 0.0f;
        }
      }
    }
    act.swap(next);
  }

  std::vector<float> result(layers.back().out_ch * nvox);
  for (std::size_t c = 0; c < layers.back().out_ch; ++c) {
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t y = 0; y < ny; ++y) {
        std::copy_n(act.row(Eigen::Index(c)).data() + padded(1, y + 1, t + 1), nx,
                    result.data() + c * nvox + t * npix + y * nx);
      }
    }
  }
  return result;
}

ComplexImage denoise_cnn(const DenoiserNet &net, const ComplexImage &z) {
  if (z.nx() < 3 || z.ny() < 3 || z.nt() < 3) {
    throw DimensionError("denoise_cnn: image must be at least 3 x 3 x 3");
  }
  if (net.layers().front().in_ch != 2 || net.layers().back().out_ch != 2) {
    throw DenoiserError("denoise_cnn: network must map 2 channels to 2 channels");
  }
  const std::size_t nvox = z.size();
  std::vector<float> input(2 * nvox);
  auto zs = z.values();
  for (std::size_t i = 0; i < nvox; ++i) {
    input[i] = static_cast<float>(zs[i].real());
    input[nvox + i] = static_cast<float>(zs[i].imag());
  }
  const std::vector<float> out = net_forward(net, input, z.nt(), z.ny(), z.nx());
  ComplexImage result(z.shape());
  auto rs = result.values();
  for (std::size_t i = 0; i < nvox; ++i) {
    const cplx predicted(out[i], out[nvox + i]);
    rs[i] = net.residual_mode() ? zs[i] - predicted : predicted;
  }
  return result;
}

ComplexImage denoise_cnn_tiled(const DenoiserNet &net, const ComplexImage &z, std::size_t tile,
                               std::size_t overlap) {
  if (tile <= overlap || tile < 3) {
    throw ParameterError("denoise_cnn_tiled: tile must exceed overlap and be at least 3");
  }
  if (z.nx() <= tile && z.ny() <= tile) {
    return denoise_cnn(net, z);
  }
  const auto starts = [&](std::size_t n) {
    std::vector<std::size_t> s;
    if (n <= tile) {
      s.push_back(0);
      return s;
    }
    const std::size_t stride = tile - overlap;
    for (std::size_t p = 0;; p += stride) {
      if (p + tile >= n) {
        s.push_back(n - tile);
        break;
      }
      s.push_back(p);
    }
    return s;
  };
  // 1-D blending ramp: linear over the overlap at interior tile edges.
  const auto ramp = [&](std::size_t i, std::size_t len, bool first, bool last) {
    double w = 1.0;
    if (!first && i < overlap) {
      w = std::min(w, double(i + 1) / double(overlap + 1));
    }
    if (!last && i + overlap >= len) {
      w = std::min(w, double(len - i) / double(overlap + 1));
    }
    return w;
  };

  const auto xs = starts(z.nx()), ys = starts(z.ny());
  const std::size_t tx = std::min(tile, z.nx()), ty = std::min(tile, z.ny());
  ComplexImage acc(z.shape());
  std::vector<double> weight(z.nx() * z.ny(), 0.0);
  for (std::size_t a = 0; a < ys.size(); ++a) {
    for (std::size_t b = 0; b < xs.size(); ++b) {
      ComplexImage patch(tx, ty, z.nt());
      for (std::size_t t = 0; t < z.nt(); ++t) {
        for (std::size_t y = 0; y < ty; ++y) {
          for (std::size_t x = 0; x < tx; ++x) {
            patch(x, y, t) = z(xs[b] + x, ys[a] + y, t);
          }
        }
      }
      const ComplexImage out = denoise_cnn(net, patch);
      for (std::size_t y = 0; y < ty; ++y) {
        const double wy = ramp(y, ty, a == 0, a + 1 == ys.size());
        for (std::size_t x = 0; x < tx; ++x) {
          const double w = wy * ramp(x, tx, b == 0, b + 1 == xs.size());
          weight[(xs[b] + x) + z.nx() * (ys[a] + y)] += w;
          for (std::size_t t = 0; t < z.nt(); ++t) {
            acc(xs[b] + x, ys[a] + y, t) += w * out(x, y, t);
          }
        }
      }
    }
  }
  for (std::size_t t = 0; t < z.nt(); ++t) {
    auto f = acc.frame(t);
    for (std::size_t p = 0; p < f.size(); ++p) {
      f[p] /= weight[p];
    }
  }
  return acc;
}

DenoiserNet random_denoiser_net(std::uint64_t seed, std::size_t width, bool residual, double target_norm) {
  const std::size_t plan[] = {2, width, width, width, width, 2};
  Rng rng(seed);
  std::vector<ConvLayer3D> layers;
  for (std::size_t k = 0; k < 5; ++k) {
    ConvLayer3D l;
    l.in_ch = plan[k];
    l.out_ch = plan[k + 1];
    l.kernel.resize(l.in_ch * l.out_ch * ConvLayer3D::kTaps);
    const double scale = std::sqrt(2.0 / double(l.in_ch * ConvLayer3D::kTaps));
    for (auto &w : l.kernel) {
      w = static_cast<float>(scale * rng.normal());
    }
    l.bias.resize(l.out_ch);
    for (auto &b : l.bias) {
      b = static_cast<float>(0.01 * rng.normal());
    }
    const double est = spectral_norm_estimate(l, ConvGrid{l.in_ch, 8, 8, 8}, 50);
    const double factor = target_norm / est;
    for (auto &w : l.kernel) {
      w = static_cast<float>(w * factor);
    }
    l.declared_spectral_norm = static_cast<float>(target_norm);
    layers.push_back(std::move(l));
  }
  return DenoiserNet(std::move(layers), residual);
}

std::vector<LayerCertificate> certify(const DenoiserNet &net, const CertificationOptions &options) {
  std::vector<LayerCertificate> out;
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const auto &l = net.layers()[k];
    ConvGrid grid = options.grid;
    grid.channels = l.in_ch;
    LayerCertificate c;
    c.layer = k;
    c.estimate = spectral_norm_estimate(l, grid, options.power_iters);
    c.declared = l.declared_spectral_norm;
    c.passed = c.estimate <= c.declared * (1.0 + options.tolerance);
    out.push_back(c);
  }
  return out;
}

double lipschitz_bound(std::span<const LayerCertificate> certificates, bool residual_mode) {
  double product = 1.0;
  for (const auto &c : certificates) {
    product *= c.estimate;
  }
  return residual_mode ? 1.0 + product : product;
}

double lipschitz_bound(const DenoiserNet &net, const CertificationOptions &options) {
  const auto certs = certify(net, options);
  return lipschitz_bound(certs, net.residual_mode());
}

} // namespace pnpmri
