#pragma once

#include "pnpmri/types.hpp"

#include <cstdint>
#include <vector>

namespace pnpmri {

struct PhantomSpec {
  std::size_t nx = 64;
  std::size_t ny = 64;
  std::size_t nt = 16;
  /// Total ellipse count: 1 = ventricle only, 2 adds the body outline,
  /// 3 adds a myocardial ring, and every further ellipse is a static organ.
  std::size_t n_ellipses = 6;
  /// Relative radius oscillation of the ventricle, in [0, 0.5].
  double motion_amplitude = 0.15;
  std::uint64_t seed = 0;
};

/// One painted ellipse in normalised coordinates u, v in [-1, 1).
struct Ellipse {
  double cx = 0, cy = 0;
  double ra = 0, rb = 0;
  double angle = 0;
  double intensity = 0;
  /// Linear shading across the ellipse: intensity·(1 + gx·u + gy·v).
  double gx = 0, gy = 0;
  /// Multiplier on motion_amplitude (0 for static structures).
  double motion = 0;

  /// Radii scale at frame t; frame 0 is the end-diastolic maximum.
  double scale_at(std::size_t t, std::size_t nt, double amplitude) const;
  bool contains(double u, double v, double scale) const;
};

struct PhantomLayout {
  /// Painter's order; the ventricle is always the last entry.
  std::vector<Ellipse> ellipses;
  /// Coefficients of c0 + c1 u + c2 v + c3 u² + c4 uv + c5 v².
  double phase[6] = {0, 0, 0, 0, 0, 0};

  const Ellipse &ventricle() const { return ellipses.back(); }
};

/// Deterministic ellipse parameters for a spec.
PhantomLayout phantom_layout(const PhantomSpec &spec);

/// Piecewise-smooth dynamic phantom, peak magnitude 1.
/// Requires nx, ny >= 16 and nt >= 4.
ComplexImage generate_cine_phantom(const PhantomSpec &spec);

/// Pixel count of the ventricle at frame t.
std::size_t ventricle_area(const PhantomSpec &spec, std::size_t t);

/// Gaussian-lobe coil sensitivities normalised to unit coil-vector norm.
SensitivityMaps generate_coil_maps(std::size_t nc, std::size_t nx, std::size_t ny, std::uint64_t seed);

/// x + w where w is circular complex Gaussian, rescaled so that
/// 20·log10(‖x‖/‖w‖) equals snr_db exactly.
ComplexImage add_noise(const ComplexImage &x, double snr_db, std::uint64_t seed);

/// Per-pixel average over frames (single-frame result).
ComplexImage temporal_mean(const ComplexImage &x);

} // namespace pnpmri
