#include "pnpmri/cg.hpp"
#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"

#include "test_support.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pnpmri;
using namespace pnpmri::testing;

namespace {

Eigen::MatrixXcd random_hpd(Eigen::Index n, double shift, Rng &rng) {
  Eigen::MatrixXcd b(n, n);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    b.data()[i] = random_cplx(rng);
  }
  return b.adjoint() * b + shift * Eigen::MatrixXcd::Identity(n, n);
}

LinearMap as_map(const Eigen::MatrixXcd &m, ImageShape s) {
  return [m, s](const ComplexImage &x) {
    Eigen::Map<const Eigen::VectorXcd> v(x.values().data(), Eigen::Index(x.size()));
    const Eigen::VectorXcd r = m * v;
    return ComplexImage(s, std::vector<cplx>(r.data(), r.data() + r.size()));
  };
}

} // namespace

TEST_CASE("CG matches a dense LU solve") {
  Rng rng(1);
  const ImageShape s{4, 3, 2};
  const Eigen::MatrixXcd a = random_hpd(24, 1.0, rng);
  const ComplexImage b = random_image(s, rng);
  const CgResult r = cg_solve(as_map(a, s), b, 1e-13, 200);
  Eigen::Map<const Eigen::VectorXcd> bv(b.values().data(), 24);
  const Eigen::VectorXcd xd = a.partialPivLu().solve(bv);
  const ComplexImage expected(s, std::vector<cplx>(xd.data(), xd.data() + 24));
  CHECK(l2_norm(r.x - expected) < 1e-9 * l2_norm(expected));
  CHECK(r.relative_residual <= 1e-13);
  CHECK(r.iterations <= 200);
}

TEST_CASE("CG converges in at most n steps on a small well-conditioned system") {
  Rng rng(2);
  const ImageShape s{3, 2, 1};
  const Eigen::MatrixXcd a = random_hpd(6, 5.0, rng);
  const CgResult r = cg_solve(as_map(a, s), random_image(s, rng), 1e-10, 50);
  CHECK(r.iterations <= 8);
}

TEST_CASE("CG honours max_iters, the warm start and a zero right-hand side") {
  Rng rng(3);
  const ImageShape s{5, 5, 2};
  const Eigen::MatrixXcd a = random_hpd(50, 0.1, rng);
  const ComplexImage b = random_image(s, rng);
  const CgResult three = cg_solve(as_map(a, s), b, 1e-14, 3);
  CHECK(three.iterations == 3);
  const CgResult exact = cg_solve(as_map(a, s), b, 1e-14, 500);
  const CgResult warm = cg_solve(as_map(a, s), b, 1e-10, 500, exact.x);
  CHECK(warm.iterations <= 1);
  const CgResult zero = cg_solve(as_map(a, s), ComplexImage(s), 1e-10, 10);
  CHECK(l2_norm(zero.x) == 0.0);
  CHECK(zero.iterations == 0);
}

TEST_CASE("CG reports divergence on indefinite or non-finite input") {
  const ImageShape s{2, 1, 1};
  const LinearMap neg = [](const ComplexImage &x) { return cplx(-1.0) * x; };
  ComplexImage b(s);
  b[0] = 1.0;
  CHECK_THROWS_AS(cg_solve(neg, b, 1e-10, 10), DivergenceError);
  ComplexImage bad(s);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  const LinearMap id = [](const ComplexImage &x) { return x; };
  CHECK_THROWS_AS(cg_solve(id, bad, 1e-10, 10), DivergenceError);
  CHECK_THROWS_AS(cg_solve(id, b, 1e-10, 10, ComplexImage(3, 1, 1)), DimensionError);
}
