#pragma once

#include "pnpmri/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pnpmri {

/// 3×3×3 convolution with real weights. Kernel layout is
/// [out][in][kt][ky][kx] (the PyTorch Conv3d layout with depth = time).
struct ConvLayer3D {
  static constexpr std::size_t kTaps = 27;

  std::size_t out_ch = 0;
  std::size_t in_ch = 0;
  std::vector<float> kernel;
  std::vector<float> bias;
  float declared_spectral_norm = 1.0f;

  float &weight(std::size_t o, std::size_t i, std::size_t dt, std::size_t dy, std::size_t dx) {
    return kernel[((o * in_ch + i) * 3 + dt) * 9 + dy * 3 + dx];
  }
  float weight(std::size_t o, std::size_t i, std::size_t dt, std::size_t dy, std::size_t dx) const {
    return kernel[((o * in_ch + i) * 3 + dt) * 9 + dy * 3 + dx];
  }
  friend bool operator==(const ConvLayer3D &, const ConvLayer3D &) = default;
};

struct NetMetadata {
  float training_snr_db = 26.0f;
  std::uint32_t patch_nx = 55, patch_ny = 55, patch_nt = 15;
  std::uint32_t revision = 1;
  friend bool operator==(const NetMetadata &, const NetMetadata &) = default;
};

/// Stack of conv layers with ReLU between them and none after the last.
/// In residual mode the denoiser output is z − net(z).
class DenoiserNet {
public:
  DenoiserNet(std::vector<ConvLayer3D> layers, bool residual_mode, bool has_bias = true, NetMetadata meta = {});

  const std::vector<ConvLayer3D> &layers() const { return layers_; }
  bool residual_mode() const { return residual_mode_; }
  bool has_bias() const { return has_bias_; }
  const NetMetadata &metadata() const { return meta_; }

  /// Five layers with channels 2→64→64→64→64→2.
  bool matches_reference_architecture() const;

  friend bool operator==(const DenoiserNet &, const DenoiserNet &) = default;

private:
  std::vector<ConvLayer3D> layers_;
  bool residual_mode_;
  bool has_bias_;
  NetMetadata meta_;
};

/// Reference architecture with He-style random weights, each layer rescaled
/// so its periodic spectral norm estimate on an 8³ grid is `target_norm`.
DenoiserNet random_denoiser_net(std::uint64_t seed, std::size_t width = 64, bool residual = true,
                                double target_norm = 1.0);

/// Channel count plus grid for a periodic convolution operator.
struct ConvGrid {
  std::size_t channels = 1;
  std::size_t nt = 8, ny = 8, nx = 8;
  std::size_t voxels() const { return nt * ny * nx; }
};

/// Largest singular value of the bias-free, periodic-boundary convolution on
/// `grid` by power iteration on WᵀW from a fixed-seed start vector.
/// Non-decreasing in power_iters. Zero kernel gives 0.
double spectral_norm_estimate(const ConvLayer3D &layer, const ConvGrid &grid, std::size_t power_iters);

/// Periodic convolution and its transpose; inputs are channel-major
/// [c][t][y][x]. Exposed for oracle tests.
std::vector<double> conv3d_periodic(const ConvLayer3D &layer, const ConvGrid &grid, std::span<const double> in);
std::vector<double> conv3d_periodic_transpose(const ConvLayer3D &layer, const ConvGrid &grid,
                                              std::span<const double> out);

/// Zero-padded network forward pass on a channel-major float tensor.
std::vector<float> net_forward(const DenoiserNet &net, std::span<const float> input, std::size_t nt,
                               std::size_t ny, std::size_t nx);

/// Real/imag channels in, denoised complex image out. Requires nx, ny, nt >= 3.
ComplexImage denoise_cnn(const DenoiserNet &net, const ComplexImage &z);

/// Overlapped tiling over x and y with linear blending across the overlap.
ComplexImage denoise_cnn_tiled(const DenoiserNet &net, const ComplexImage &z, std::size_t tile,
                               std::size_t overlap = 8);

struct CertificationOptions {
  ConvGrid grid{};
  std::size_t power_iters = 30;
  double tolerance = 1e-3;
};

struct LayerCertificate {
  std::size_t layer = 0;
  double estimate = 0.0;
  double declared = 0.0;
  bool passed = false;
};

/// Estimates every layer's norm; never throws on a violation.
std::vector<LayerCertificate> certify(const DenoiserNet &net, const CertificationOptions &options = {});

/// Product of per-layer estimates; 1 + product in residual mode.
double lipschitz_bound(const DenoiserNet &net, const CertificationOptions &options = {});
double lipschitz_bound(std::span<const LayerCertificate> certificates, bool residual_mode);

} // namespace pnpmri
