#include "pnpmri/linalg.hpp"

#include "pnpmri/errors.hpp"

#include <cmath>

namespace pnpmri {

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) {
    throw DimensionError("inner_product: length mismatch");
  }
  // Split real/imag accumulators keep the loop vectorisable with a fixed
  // reduction order.
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

cplx inner_product(const ComplexImage &a, const ComplexImage &b) {
  if (!a.same_shape(b)) {
    throw DimensionError("inner_product: image shape mismatch");
  }
  return inner_product(a.values(), b.values());
}

cplx inner_product(const MultiCoilKSpace &a, const MultiCoilKSpace &b) {
  if (!a.same_shape(b)) {
    throw DimensionError("inner_product: k-space shape mismatch");
  }
  return inner_product(a.values(), b.values());
}

double l2_norm(std::span<const cplx> a) {
  double ss = 0.0;
  for (const auto &v : a) {
    ss += v.real() * v.real() + v.imag() * v.imag();
  }
  return std::sqrt(ss);
}

double l2_norm(const ComplexImage &a) { return l2_norm(a.values()); }
double l2_norm(const MultiCoilKSpace &a) { return l2_norm(a.values()); }

void axpy(cplx alpha, const ComplexImage &x, ComplexImage &y) {
  if (!x.same_shape(y)) {
    throw DimensionError("axpy: image shape mismatch");
  }
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ys[i] += alpha * xs[i];
  }
}

double l1_norm(std::span<const cplx> a) {
  double s = 0.0;
  for (const auto &v : a) {
    s += std::abs(v);
  }
  return s;
}

} // namespace pnpmri
