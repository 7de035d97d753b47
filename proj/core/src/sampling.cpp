#include "pnpmri/sampling.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pnpmri {

double line_weight(std::size_t ky, std::size_t nky) {
  const double c = static_cast<double>(nky / 2);
  const double d = std::abs(static_cast<double>(ky) - c) / static_cast<double>(nky);
  return 1.0 / ((1.0 + d) * (1.0 + d));
}

SamplingMask generate_mask(const MaskSpec &spec) {
  if (spec.nkx == 0 || spec.nky == 0 || spec.nt == 0) {
    throw DimensionError("mask dimensions must be positive");
  }
  if (!(spec.R >= 1.0)) {
    throw ParameterError("acceleration R must be >= 1");
  }
  if (spec.asym_echo_fraction < 0.0 || spec.asym_echo_fraction >= 0.5) {
    throw ParameterError("asym_echo_fraction must lie in [0, 0.5)");
  }
  const auto budget = static_cast<std::size_t>(std::floor(static_cast<double>(spec.nky) / spec.R));
  if (budget == 0 || budget < spec.calib_lines) {
    throw InfeasibleSpecError("line budget " + std::to_string(budget) + " cannot hold " +
                              std::to_string(spec.calib_lines) + " calibration lines");
  }

  const std::size_t centre = spec.nky / 2;
  const std::size_t calib_start = centre - std::min(centre, spec.calib_lines / 2);
  const auto drop = static_cast<std::size_t>(std::floor(spec.asym_echo_fraction * static_cast<double>(spec.nkx)));

  SamplingMask mask(spec.nkx, spec.nky, spec.nt,
                    static_cast<double>(spec.nky) / static_cast<double>(budget));
  std::vector<double> weights(spec.nky);
  std::vector<std::uint8_t> chosen(spec.nky);

  for (std::size_t t = 0; t < spec.nt; ++t) {
    Rng rng(derive_seed(spec.seed, t));
    std::fill(chosen.begin(), chosen.end(), 0);
    std::size_t kept = 0;
    for (std::size_t k = 0; k < spec.calib_lines; ++k) {
      chosen[calib_start + k] = 1;
      ++kept;
    }
    double total = 0.0;
    for (std::size_t ky = 0; ky < spec.nky; ++ky) {
      weights[ky] = chosen[ky] ? 0.0 : line_weight(ky, spec.nky);
      total += weights[ky];
    }
    while (kept < budget) {
      double target = rng.uniform() * total;
      std::size_t pick = spec.nky;
      for (std::size_t ky = 0; ky < spec.nky; ++ky) {
        if (weights[ky] == 0.0) {
          continue;
        }
        pick = ky;
        target -= weights[ky];
        if (target < 0.0) {
          break;
        }
      }
      chosen[pick] = 1;
      total -= weights[pick];
      weights[pick] = 0.0;
      ++kept;
    }
    for (std::size_t ky = 0; ky < spec.nky; ++ky) {
      if (!chosen[ky]) {
        continue;
      }
      for (std::size_t kx = drop; kx < spec.nkx; ++kx) {
        mask.set(kx, ky, t, true);
      }
    }
  }
  return mask;
}

double acceleration_of(const SamplingMask &mask) {
  const std::size_t kept = mask.count();
  if (kept == 0) {
    throw EmptyMaskError("acceleration_of: mask keeps no samples");
  }
  return static_cast<double>(mask.size()) / static_cast<double>(kept);
}

} // namespace pnpmri
