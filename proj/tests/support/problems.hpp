#pragma once

#include "pnpmri/phantom.hpp"
#include "pnpmri/random.hpp"
#include "pnpmri/sampling.hpp"
#include "pnpmri/sense.hpp"

namespace pnpmri::testing {

/// Phantom, simulated maps, a ky-t mask and noisy undersampled k-space.
struct Problem {
  ComplexImage truth;
  SenseModel model;
  MultiCoilKSpace data;
};

inline Problem make_problem(std::size_t n, std::size_t nt, std::size_t nc, double R, double snr_db,
                            std::uint64_t seed) {
  PhantomSpec ps;
  ps.nx = ps.ny = n;
  ps.nt = nt;
  ps.seed = derive_seed(seed, 1);
  ComplexImage truth = generate_cine_phantom(ps);
  MaskSpec ms;
  ms.nkx = ms.nky = n;
  ms.nt = nt;
  ms.R = R;
  ms.calib_lines = R > 1.0 ? 4 : 0;
  ms.seed = derive_seed(seed, 2);
  SenseModel model(generate_coil_maps(nc, n, n, derive_seed(seed, 3)), generate_mask(ms));
  MultiCoilKSpace data = sense_forward(truth, model);
  if (snr_db > 0.0) {
    const ComplexImage flat(ImageShape{n, n, nt * nc}, {data.values().begin(), data.values().end()});
    const ComplexImage noisy = add_noise(flat, snr_db, derive_seed(seed, 4));
    data = MultiCoilKSpace(data.shape(), {noisy.values().begin(), noisy.values().end()});
    apply_mask(data, model.mask());
  }
  return {std::move(truth), std::move(model), std::move(data)};
}

/// The 32×32×8, four-coil, R = 4 problem used by solver comparisons.
inline Problem standard_problem(std::uint64_t seed = 1) { return make_problem(32, 8, 4, 4.0, 30.0, seed); }

/// Eight coils with every other ky line per frame, shifted each frame: the
/// normal equations are well conditioned, so least squares has a sharp oracle.
inline Problem interleaved_problem(std::uint64_t seed = 1) {
  Problem p = make_problem(32, 8, 8, 1.0, 30.0, seed);
  SamplingMask m(32, 32, 8, 2.0);
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t ky = t % 2; ky < 32; ky += 2) {
      for (std::size_t kx = 0; kx < 32; ++kx) {
        m.set(kx, ky, t, true);
      }
    }
  }
  p.model = SenseModel(p.model.maps(), m);
  apply_mask(p.data, m);
  return p;
}

} // namespace pnpmri::testing
