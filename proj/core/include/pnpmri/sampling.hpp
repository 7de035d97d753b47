#pragma once

#include "pnpmri/types.hpp"

#include <cstdint>

namespace pnpmri {

struct MaskSpec {
  std::size_t nkx = 64;
  std::size_t nky = 64;
  std::size_t nt = 16;
  double R = 8.0;
  /// Fully sampled central ky lines in every frame.
  std::size_t calib_lines = 4;
  /// Fraction of leading kx columns dropped on every kept line, in [0, 0.5).
  double asym_echo_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Variable-density weight of phase-encode line ky: (1 + |ky - c|/nky)^-2.
double line_weight(std::size_t ky, std::size_t nky);

/// Pseudo-random Cartesian ky-t mask. Each frame keeps floor(nky/R) lines:
/// the calibration band plus centre-weighted random lines drawn without
/// replacement from a per-frame stream.
SamplingMask generate_mask(const MaskSpec &spec);

/// total entries / kept entries
double acceleration_of(const SamplingMask &mask);

} // namespace pnpmri
