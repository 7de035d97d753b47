#pragma once

#include "pnpmri/types.hpp"

#include <functional>

namespace pnpmri {

using LinearMap = std::function<ComplexImage(const ComplexImage &)>;

struct CgResult {
  ComplexImage x;
  std::size_t iterations = 0;
  /// ‖gram_apply(x) − b‖ / ‖b‖ from the recursively updated residual.
  double relative_residual = 0.0;
};

/// Conjugate gradients for a Hermitian positive definite map. Stops when the
/// relative residual drops to tol or after max_iters. Throws DivergenceError
/// on non-finite values or non-positive curvature.
CgResult cg_solve(const LinearMap &gram_apply, const ComplexImage &b, double tol, std::size_t max_iters);
CgResult cg_solve(const LinearMap &gram_apply, const ComplexImage &b, double tol, std::size_t max_iters,
                  const ComplexImage &x0);

} // namespace pnpmri
