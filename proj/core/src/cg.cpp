#include "pnpmri/cg.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"

#include <cmath>

namespace pnpmri {

CgResult cg_solve(const LinearMap &gram_apply, const ComplexImage &b, double tol, std::size_t max_iters) {
  return cg_solve(gram_apply, b, tol, max_iters, ComplexImage(b.shape()));
}

CgResult cg_solve(const LinearMap &gram_apply, const ComplexImage &b, double tol, std::size_t max_iters,
                  const ComplexImage &x0) {
  if (!b.same_shape(x0)) {
    throw DimensionError("cg_solve: initial guess shape differs from right-hand side");
  }
  const double bnorm = l2_norm(b);
  CgResult result{ComplexImage(b.shape()), 0, 0.0};
  if (bnorm == 0.0) {
    return result;
  }
  if (!std::isfinite(bnorm)) {
    throw DivergenceError("cg_solve: right-hand side is not finite");
  }

  ComplexImage x = x0;
  ComplexImage r = b;
  if (l2_norm(x0) != 0.0) {
    r -= gram_apply(x0);
  }
  ComplexImage p = r;
  double rr = std::real(inner_product(r, r));
  result.relative_residual = std::sqrt(rr) / bnorm;

  while (result.iterations < max_iters && result.relative_residual > tol) {
    const ComplexImage ap = gram_apply(p);
    const double pap = std::real(inner_product(p, ap));
    if (!std::isfinite(pap)) {
      throw DivergenceError("cg_solve: non-finite curvature");
    }
    if (pap <= 0.0) {
      throw DivergenceError("cg_solve: operator is not positive definite along search direction");
    }
    const double alpha = rr / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rr_next = std::real(inner_product(r, r));
    ++result.iterations;
    result.relative_residual = std::sqrt(rr_next) / bnorm;
    if (!std::isfinite(rr_next)) {
      throw DivergenceError("cg_solve: residual became non-finite");
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    // p = r + beta p
    auto ps = p.values();
    auto rs = r.values();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i] = rs[i] + beta * ps[i];
    }
  }
  result.x = std::move(x);
  return result;
}

} // namespace pnpmri
