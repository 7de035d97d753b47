#pragma once

#include "pnpmri/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pnpmri {

struct CoilCompression {
  MultiCoilKSpace data;
  /// nc × n_virtual; virtual coil v = Σ_c conj(basis(c, v))·coil c.
  Eigen::MatrixXcd basis;
  /// Singular values of the (nc × samples) coil matrix, descending.
  std::vector<double> singular_values;
  /// Kept squared singular values over their total.
  double energy_retained = 1.0;
};

/// PCA coil compression onto the top n_virtual left singular vectors.
CoilCompression coil_compress(const MultiCoilKSpace &y, std::size_t n_virtual);

/// Apply a compression basis to sensitivity maps: S_v = Σ_c conj(U_cv) S_c.
/// The result is the exact encoding of the compressed data; it is not
/// renormalised.
SensitivityMaps compress_maps(const SensitivityMaps &maps, const Eigen::MatrixXcd &basis);

struct WalshEstimate {
  SensitivityMaps maps;
  /// Pixels whose whole neighbourhood was zero (map left at zero).
  std::size_t flagged_pixels = 0;
};

/// Adaptive coil-map estimation: per pixel, principal eigenvector of the
/// block×block coil covariance (zero-padded at borders), phase fixed so the
/// first nonzero coil entry is real non-negative, unit norm. Multi-frame
/// inputs are averaged over time first.
WalshEstimate estimate_maps_walsh(std::span<const ComplexImage> coil_images, std::size_t block = 7);

/// Per-location average of the sampled k-space over frames; single frame out.
/// Locations never sampled stay zero.
MultiCoilKSpace time_average_sampled(const MultiCoilKSpace &y, const SamplingMask &mask);

/// Matched-filter combination Σ_c conj(S_c)·img_c.
ComplexImage coil_combine(std::span<const ComplexImage> coil_images, const SensitivityMaps &maps);

} // namespace pnpmri
