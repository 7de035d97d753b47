#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"
#include "pnpmri/metrics.hpp"
#include "pnpmri/regularizers.hpp"
#include "pnpmri/solvers.hpp"

#include "problems.hpp"
#include "svt_oracle.hpp"
#include "test_support.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>

using namespace pnpmri;
using namespace pnpmri::testing;

namespace {

double cg_least_squares_fidelity(const Problem &p) {
  const ComplexImage b = sense_adjoint(p.data, p.model);
  const CgResult r =
      cg_solve([&](const ComplexImage &x) { return sense_gram(x, p.model); }, b, 1e-13, 2000);
  return data_fidelity(r.x, p.data, p.model);
}

// Full sampling with unit-norm maps makes AᴴA = I, so
// ½‖Ax − d‖² + λ‖x‖₁ is minimised by soft(Aᴴd, λ).
Problem fully_sampled(std::uint64_t seed) { return make_problem(16, 4, 3, 1.0, 20.0, seed); }

double lasso_objective(const ComplexImage &x, const Problem &p, double lambda) {
  return data_fidelity(x, p.data, p.model) + lambda * l1_norm(x.values());
}

} // namespace

TEST_CASE("ADMM with the identity denoiser reaches the least-squares data fidelity") {
  const Problem p = interleaved_problem();
  AdmmConfig cfg;
  cfg.nu = 100.0;
  cfg.outer_iters = 30;
  cfg.cg_iters = 100;
  cfg.cg_tol = 1e-12;
  const SolveReport rep = admm_pnp(p.data, p.model, cfg);
  const double oracle = cg_least_squares_fidelity(p);
  REQUIRE(oracle > 0.0);
  CHECK(rel_diff(rep.iterations.back().data_fidelity, oracle) < 1e-6);
  CHECK(rep.iterations.size() == 30);
  CHECK(rep.image.shape() == p.model.image_shape());
}

TEST_CASE("dual update is pure bookkeeping: u_t = u_{t-1} + (v_t - x_t) bitwise") {
  const Problem p = standard_problem(2);
  for (auto dual : {DualUpdate::Standard, DualUpdate::Reversed}) {
    AdmmConfig cfg;
    cfg.outer_iters = 6;
    cfg.dual = dual;
    const UwtDenoiser g(0.01);
    std::size_t seen = 0;
    admm_pnp(p.data, p.model, cfg, g, std::nullopt, [&](const AdmmIterate &it) {
      ++seen;
      const ComplexImage expected = it.u_prev + (it.v - it.x);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        REQUIRE(expected[i] == it.u[i]);
      }
    });
    CHECK(seen == 6);
  }
}

TEST_CASE("a constructed fixed point stays put") {
  // x* = soft(x* ± u*, τ) holds when |x*_i| > 0 ⇒ ±u*_i = τ x*_i/|x*_i| and
  // |u*_i| ≤ τ elsewhere. The v-step returns x* when Aᴴ(d − Ax*) = ∓... is
  // arranged so that ∇f(x*) = −u*/ν; with AᴴA = I, d = A(x* + u*/ν).
  const double tau = 0.05, nu = 2.0;
  Problem p = fully_sampled(3);
  Rng rng(9);
  for (auto dual : {DualUpdate::Standard, DualUpdate::Reversed}) {
    const double s = dual == DualUpdate::Standard ? 1.0 : -1.0;
    ComplexImage xs(p.model.image_shape()), us(p.model.image_shape());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (rng.uniform() < 0.5) {
        xs[i] = random_cplx(rng);
        us[i] = s * tau * xs[i] / std::abs(xs[i]);
      } else {
        us[i] = std::polar(0.9 * tau * rng.uniform(), 6.28 * rng.uniform());
      }
    }
    p.data = sense_forward(xs + cplx(1.0 / nu) * us, p.model);
    AdmmConfig cfg;
    cfg.nu = nu;
    cfg.outer_iters = 5;
    cfg.cg_iters = 20;
    cfg.cg_tol = 1e-14;
    cfg.dual = dual;
    const SoftThresholdDenoiser g(tau);
    ComplexImage prev = xs;
    admm_pnp(p.data, p.model, cfg, g, AdmmState{xs, us}, [&](const AdmmIterate &it) {
      REQUIRE(l2_norm(it.x - prev) <= 1e-8 * l2_norm(xs));
      REQUIRE(l2_norm(it.u - us) <= 1e-8 * l2_norm(us));
      prev = it.x;
    });
  }
}

TEST_CASE("with a proximal denoiser the standard update solves the regularised problem") {
  const Problem p = fully_sampled(4);
  const double tau = 0.02, nu = 0.5, lambda = tau / nu;
  const ComplexImage oracle = soft_threshold(sense_adjoint(p.data, p.model), lambda);
  AdmmConfig cfg;
  cfg.nu = nu;
  cfg.outer_iters = 200;
  cfg.cg_iters = 10;
  cfg.cg_tol = 1e-14;
  const SolveReport std_rep = admm_pnp(p.data, p.model, cfg, SoftThresholdDenoiser(tau));
  CHECK(l2_norm(std_rep.image - oracle) < 1e-8 * l2_norm(oracle));
  CHECK(*std_rep.iterations.back().objective == doctest::Approx(lasso_objective(oracle, p, lambda)).epsilon(1e-10));

  // The reversed sign converges to a point satisfying ∇f ∈ ∂φ instead.
  cfg.dual = DualUpdate::Reversed;
  const SolveReport rev = admm_pnp(p.data, p.model, cfg, SoftThresholdDenoiser(tau));
  CHECK(l2_norm(rev.image - oracle) > 1e-3 * l2_norm(oracle));
  CHECK(lasso_objective(rev.image, p, lambda) > lasso_objective(oracle, p, lambda));
}

TEST_CASE("FISTA with the thresholding prox shares ADMM's fixed point at nu = 1") {
  const Problem p = standard_problem(5);
  const double tau = 0.01;
  AdmmConfig cfg;
  cfg.nu = 1.0;
  cfg.outer_iters = 150;
  cfg.cg_iters = 20;
  cfg.cg_tol = 1e-12;
  const SolveReport admm = admm_pnp(p.data, p.model, cfg, UwtDenoiser(tau));
  const SolveReport fista = fista_uwt(p.data, p.model, tau, 300);
  CHECK(rel_diff(admm.final_objective(), fista.final_objective()) < 1e-3);
  CHECK(l2_norm(admm.image - fista.image) < 1e-2 * l2_norm(fista.image));
}

TEST_CASE("FISTA objective never increases") {
  const Problem p = standard_problem(6);
  for (auto prox : {UwtProx::Thresholding, UwtProx::Exact}) {
    FistaOptions opt;
    opt.prox = prox;
    const SolveReport r = fista_uwt(p.data, p.model, 0.02, 40, opt);
    for (std::size_t k = 1; k < r.iterations.size(); ++k) {
      if (prox == UwtProx::Exact) {
        REQUIRE(*r.iterations[k].objective <= *r.iterations[k - 1].objective);
      }
    }
    CHECK(*r.iterations.back().objective < *r.iterations.front().objective);
  }
}

TEST_CASE("exact UWT prox: large threshold leaves only the mean, small threshold beats plain thresholding") {
  Rng rng(7);
  const ComplexImage z = random_image({8, 8, 4}, rng);
  const ComplexImage big = prox_uwt_l1_exact(z, 1e6, 2000);
  cplx mean = 0.0;
  for (const auto &v : z.values()) {
    mean += v;
  }
  mean /= double(z.size());
  CHECK(uwt_detail_l1(big) <= 1e-6 * l2_norm(big));
  for (const auto &v : big.values()) {
    REQUIRE(std::abs(v - mean) < 1e-6);
  }

  const double tau = 0.3;
  const auto obj = [&](const ComplexImage &x) { return tau * uwt_detail_l1(x) + 0.5 * std::pow(l2_norm(x - z), 2); };
  const ComplexImage exact = prox_uwt_l1_exact(z, tau, 500);
  CHECK(obj(exact) <= obj(prox_uwt_l1(z, tau)));
  for (int k = 0; k < 30; ++k) {
    const ComplexImage d = cplx(1e-3) * random_image(z.shape(), rng);
    REQUIRE(obj(exact) <= obj(exact + d) + 1e-9);
  }
}

TEST_CASE("CS-TV: zero weight gives least squares, positive weight is a minimiser") {
  const Problem q = interleaved_problem(8);
  const SolveReport ls = admm_tv(q.data, q.model, 0.0, 100.0, 30, 100, 1e-12);
  CHECK(rel_diff(ls.iterations.back().data_fidelity, cg_least_squares_fidelity(q)) < 1e-6);

  const Problem p = standard_problem(8);

  const double lambda = 0.01;
  const SolveReport tv = admm_tv(p.data, p.model, lambda, 1.0, 300, 20, 1e-12);
  const auto obj = [&](const ComplexImage &x) { return data_fidelity(x, p.data, p.model) + lambda * tv_l1(x); };
  CHECK(*tv.iterations.back().objective == doctest::Approx(obj(tv.image)).epsilon(1e-12));
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const ComplexImage d = cplx(1e-3) * random_image(tv.image.shape(), rng);
    REQUIRE(obj(tv.image) <= obj(tv.image + d) * (1.0 + 1e-6));
  }
  CHECK(rsnr(p.truth, tv.image) > rsnr(p.truth, sense_adjoint(p.data, p.model)));
}

TEST_CASE("singular value thresholding matches a dense SVD oracle") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    // 40 columns exceed the size below which Eigen's BDCSVD defers to Jacobi
    Eigen::MatrixXcd m(trial % 2 ? 16 : 64, trial % 2 ? 8 : 40);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = random_cplx(rng);
    }
    const double tau = 1.5 * rng.uniform();
    REQUIRE((svt(m, tau) - svt_eig_oracle(m, tau)).norm() <= 1e-9 * m.norm());
  }
  CHECK_THROWS_AS(svt(Eigen::MatrixXcd::Ones(3, 2), -1.0), ParameterError);
}

TEST_CASE("Casorati reshaping round-trips with frames as columns") {
  Rng rng(11);
  const ComplexImage x = random_image({4, 3, 5}, rng);
  const Eigen::MatrixXcd c = to_casorati(x);
  CHECK(c.rows() == 12);
  CHECK(c.cols() == 5);
  CHECK(c(2 + 4 * 1, 3) == x(2, 1, 3));
  CHECK(from_casorati(c, x.shape()) == x);
}

TEST_CASE("L+S recovers a static fully sampled phantom") {
  Problem p = make_problem(32, 8, 4, 1.0, 0.0, 12);
  PhantomSpec ps;
  ps.nx = ps.ny = 32;
  ps.nt = 8;
  ps.motion_amplitude = 0.0;
  ps.seed = 12;
  p.truth = generate_cine_phantom(ps);
  p.data = sense_forward(p.truth, p.model);
  const SolveReport r = lps(p.data, p.model, 1e-5, 1e-4, 50);
  CHECK(r.iterations.size() <= 50);
  CHECK(rsnr(p.truth, r.image) >= 80.0);
}

TEST_CASE("L+S improves on the zero-filled image for a dynamic phantom") {
  const Problem p = make_problem(32, 8, 4, 4.0, 30.0, 13);
  const SolveReport r = lps(p.data, p.model, 0.02, 0.01, 30);
  CHECK(rsnr(p.truth, r.image) > rsnr(p.truth, sense_adjoint(p.data, p.model)));
}

TEST_CASE("solvers are deterministic") {
  const Problem p = standard_problem(14);
  AdmmConfig cfg;
  cfg.outer_iters = 5;
  cfg.denoiser = {"uwt", 0.01, ""};
  CHECK(admm_pnp(p.data, p.model, cfg).image == admm_pnp(p.data, p.model, cfg).image);
  CHECK(fista_uwt(p.data, p.model, 0.01, 10).image == fista_uwt(p.data, p.model, 0.01, 10).image);
  CHECK(admm_tv(p.data, p.model, 0.01, 1.0, 5, 5).image == admm_tv(p.data, p.model, 0.01, 1.0, 5, 5).image);
  CHECK(lps(p.data, p.model, 0.01, 0.01, 5).image == lps(p.data, p.model, 0.01, 0.01, 5).image);
}

TEST_CASE("invalid solver parameters are rejected") {
  const Problem p = standard_problem(15);
  AdmmConfig cfg;
  cfg.nu = 0.0;
  CHECK_THROWS_AS(admm_pnp(p.data, p.model, cfg), ParameterError);
  cfg = {};
  cfg.outer_iters = 0;
  CHECK_THROWS_AS(admm_pnp(p.data, p.model, cfg), ParameterError);
  CHECK_THROWS_AS(fista_uwt(p.data, p.model, -1.0, 5), ParameterError);
  CHECK_THROWS_AS(lps(p.data, p.model, -1.0, 0.1, 5), ParameterError);
  cfg = {};
  cfg.denoiser.kind = "bogus";
  CHECK_THROWS_AS(admm_pnp(p.data, p.model, cfg), DenoiserError);
}
