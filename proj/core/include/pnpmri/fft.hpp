#pragma once

#include "pnpmri/types.hpp"

#include <span>
#include <vector>

namespace pnpmri {

/// Centred (DC at index n/2), unitary 2-D DFT of an nx-by-ny frame stored x
/// fastest. `in` and `out` may alias.
void fft2c(std::span<const cplx> in, std::span<cplx> out, std::size_t nx, std::size_t ny);
void ifft2c(std::span<const cplx> in, std::span<cplx> out, std::size_t nx, std::size_t ny);

std::vector<cplx> fft2c(std::span<const cplx> in, std::size_t nx, std::size_t ny);
std::vector<cplx> ifft2c(std::span<const cplx> in, std::size_t nx, std::size_t ny);

/// Centred unitary DFT along t for every pixel.
ComplexImage fft_t(const ComplexImage &x);
ComplexImage ifft_t(const ComplexImage &x);

} // namespace pnpmri
