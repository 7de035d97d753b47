#pragma once

#include "pnpmri/types.hpp"

namespace pnpmri {

/// Cartesian SENSE encoding A: x -> mask ⊙ fft2c(S_c ⊙ x_t) for every coil
/// and frame. Image grid equals k-space grid.
class SenseModel {
public:
  SenseModel(SensitivityMaps maps, SamplingMask mask);

  const SensitivityMaps &maps() const { return maps_; }
  const SamplingMask &mask() const { return mask_; }
  ImageShape image_shape() const { return {maps_.nx(), maps_.ny(), mask_.nt()}; }
  KSpaceShape kspace_shape() const { return {maps_.nc(), maps_.nx(), maps_.ny(), mask_.nt()}; }

private:
  SensitivityMaps maps_;
  SamplingMask mask_;
};

MultiCoilKSpace sense_forward(const ComplexImage &x, const SenseModel &model);
ComplexImage sense_adjoint(const MultiCoilKSpace &y, const SenseModel &model);

/// AᴴA x, computed frame by frame without materialising k-space.
ComplexImage sense_gram(const ComplexImage &x, const SenseModel &model);

/// ½‖Ax − d‖².
double data_fidelity(const ComplexImage &x, const MultiCoilKSpace &d, const SenseModel &model);

/// Zero every k-space entry the mask does not keep.
void apply_mask(MultiCoilKSpace &y, const SamplingMask &mask);

/// Per-coil images: ifft2c of each coil/frame (no masking).
std::vector<ComplexImage> coil_images(const MultiCoilKSpace &y);

} // namespace pnpmri
