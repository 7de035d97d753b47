#pragma once

#include "pnpmri/types.hpp"

#include <array>
#include <span>

namespace pnpmri {

/// Complex magnitude shrinkage z·max(|z| − tau, 0)/|z|. Phase is kept.
void soft_threshold(std::span<const cplx> z, double tau, std::span<cplx> out);
ComplexImage soft_threshold(const ComplexImage &z, double tau);

/// Single-level undecimated 3-D Haar analysis, periodic boundary.
/// Band index b = bx + 2·by + 4·bt with 0 = low-pass, 1 = high-pass along
/// that axis; band 0 is the approximation. Per-axis filters are (a ± b)/2,
/// i.e. the usual orthonormal Haar pair times 1/√2, so the eight bands form a
/// tight frame: uwt_adjoint(uwt_forward(x)) = x and ‖W x‖ = ‖x‖.
struct UwtCoeffs {
  static constexpr std::size_t kBands = 8;
  std::array<ComplexImage, kBands> bands;
};

UwtCoeffs uwt_forward(const ComplexImage &x);
ComplexImage uwt_adjoint(const UwtCoeffs &c);

/// Σ over detail bands (1..7) of |coefficient|.
double uwt_detail_l1(const ComplexImage &x);

/// W^H(soft-threshold of detail bands by tau)(W z); approximation untouched.
ComplexImage prox_uwt_l1(const ComplexImage &z, double tau);

/// Circular forward differences along x, y and t.
struct FiniteDiffCoeffs {
  ComplexImage dx, dy, dt;
};

FiniteDiffCoeffs finite_diff_forward(const ComplexImage &x);
ComplexImage finite_diff_adjoint(const FiniteDiffCoeffs &c);
/// Anisotropic total variation ‖Dx‖₁.
double tv_l1(const ComplexImage &x);

} // namespace pnpmri
