#pragma once

#include "pnpmri/types.hpp"

#include <span>

namespace pnpmri {

/// Σ conj(a_i)·b_i. Throws DimensionError on shape mismatch.
cplx inner_product(const ComplexImage &a, const ComplexImage &b);
cplx inner_product(const MultiCoilKSpace &a, const MultiCoilKSpace &b);
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b);

double l2_norm(const ComplexImage &a);
double l2_norm(const MultiCoilKSpace &a);
double l2_norm(std::span<const cplx> a);

/// y += alpha·x
void axpy(cplx alpha, const ComplexImage &x, ComplexImage &y);

/// Σ |a_i| (the l1 norm of complex entries).
double l1_norm(std::span<const cplx> a);

} // namespace pnpmri
