#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"
#include "pnpmri/regularizers.hpp"
#include "pnpmri/solvers.hpp"

#include <chrono>
#include <cmath>

namespace pnpmri {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

void AdmmConfig::validate() const {
  if (!(nu > 0.0)) {
    throw ParameterError("ADMM: nu must be positive");
  }
  if (outer_iters == 0 || cg_iters == 0) {
    throw ParameterError("ADMM: iteration counts must be at least 1");
  }
  if (!(cg_tol > 0.0)) {
    throw ParameterError("ADMM: cg_tol must be positive");
  }
}

SolveReport admm_pnp(const MultiCoilKSpace &d, const SenseModel &model, const AdmmConfig &cfg) {
  const auto denoiser = make_denoiser(cfg.denoiser);
  return admm_pnp(d, model, cfg, *denoiser);
}

SolveReport admm_pnp(const MultiCoilKSpace &d, const SenseModel &model, const AdmmConfig &cfg,
                     const Denoiser &denoiser, const std::optional<AdmmState> &start,
                     const AdmmObserver &observer) {
  cfg.validate();
  const auto t0 = Clock::now();
  const ComplexImage aty = sense_adjoint(d, model);
  const double inv_nu = 1.0 / cfg.nu;

  ComplexImage x = start ? start->x : aty;
  ComplexImage u = start ? start->u : ComplexImage(aty.shape());
  if (!x.same_shape(aty) || !u.same_shape(aty)) {
    throw DimensionError("admm_pnp: starting point shape mismatch");
  }
  ComplexImage v = x;

  const LinearMap gram = [&](const ComplexImage &z) {
    ComplexImage out = sense_gram(z, model);
    axpy(inv_nu, z, out);
    return out;
  };

  SolveReport report;
  report.solver = "admm-pnp/" + denoiser.name();
  for (std::size_t t = 1; t <= cfg.outer_iters; ++t) {
    ComplexImage rhs = aty;
    axpy(inv_nu, x, rhs);
    axpy(-inv_nu, u, rhs);
    CgResult cg = cg_solve(gram, rhs, cfg.cg_tol, cfg.cg_iters, v);
    v = std::move(cg.x);

    ComplexImage z = v;
    if (cfg.dual == DualUpdate::Standard) {
      z += u;
    } else {
      z -= u;
    }
    ComplexImage x_next = denoiser.apply(z);
    if (!x_next.same_shape(v)) {
      throw DenoiserError("admm_pnp: denoiser changed the image shape");
    }
    if (!x_next.all_finite()) {
      throw DivergenceError("admm_pnp: denoiser produced non-finite values");
    }
    const ComplexImage u_prev = u;
    u += v - x_next;
    x = std::move(x_next);

    IterationRecord rec;
    rec.iteration = t;
    rec.data_fidelity = data_fidelity(x, d, model);
    rec.primal_residual = l2_norm(v - x);
    if (auto phi = denoiser.penalty(x, cfg.nu)) {
      rec.objective = rec.data_fidelity + *phi;
    }
    rec.cg_iterations = cg.iterations;
    rec.cg_residual = cg.relative_residual;
    rec.elapsed_seconds = seconds_since(t0);
    report.iterations.push_back(rec);
    if (observer) {
      observer(AdmmIterate{t, v, x, u, u_prev});
    }
  }
  report.image = std::move(x);
  report.wall_seconds = seconds_since(t0);
  return report;
}

SolveReport admm_tv(const MultiCoilKSpace &d, const SenseModel &model, double lambda, double nu,
                    std::size_t outer_iters, std::size_t cg_iters, double cg_tol) {
  if (!(lambda >= 0.0) || !(nu > 0.0)) {
    throw ParameterError("admm_tv: lambda must be non-negative and nu positive");
  }
  if (outer_iters == 0 || cg_iters == 0) {
    throw ParameterError("admm_tv: iteration counts must be at least 1");
  }
  const auto t0 = Clock::now();
  const ComplexImage aty = sense_adjoint(d, model);
  const double inv_nu = 1.0 / nu;

  ComplexImage x = aty;
  FiniteDiffCoeffs z = finite_diff_forward(x);
  FiniteDiffCoeffs u{ComplexImage(x.shape()), ComplexImage(x.shape()), ComplexImage(x.shape())};

  const LinearMap gram = [&](const ComplexImage &w) {
    ComplexImage out = sense_gram(w, model);
    axpy(inv_nu, finite_diff_adjoint(finite_diff_forward(w)), out);
    return out;
  };

  SolveReport report;
  report.solver = "admm-tv";
  for (std::size_t t = 1; t <= outer_iters; ++t) {
    FiniteDiffCoeffs target{z.dx - u.dx, z.dy - u.dy, z.dt - u.dt};
    ComplexImage rhs = aty;
    axpy(inv_nu, finite_diff_adjoint(target), rhs);
    CgResult cg = cg_solve(gram, rhs, cg_tol, cg_iters, x);
    x = std::move(cg.x);

    const FiniteDiffCoeffs dx = finite_diff_forward(x);
    double residual_sq = 0.0;
    const auto update = [&](const ComplexImage &g, ComplexImage &zc, ComplexImage &uc) {
      zc = soft_threshold(g + uc, lambda * nu);
      uc += g;
      uc -= zc;
      const double r = l2_norm(g - zc);
      residual_sq += r * r;
    };
    update(dx.dx, z.dx, u.dx);
    update(dx.dy, z.dy, u.dy);
    update(dx.dt, z.dt, u.dt);

    IterationRecord rec;
    rec.iteration = t;
    rec.data_fidelity = data_fidelity(x, d, model);
    rec.primal_residual = std::sqrt(residual_sq);
    rec.objective = rec.data_fidelity + lambda * tv_l1(x);
    rec.cg_iterations = cg.iterations;
    rec.cg_residual = cg.relative_residual;
    rec.elapsed_seconds = seconds_since(t0);
    report.iterations.push_back(rec);
    if (!x.all_finite()) {
      throw DivergenceError("admm_tv: iterate became non-finite");
    }
  }
  report.image = std::move(x);
  report.wall_seconds = seconds_since(t0);
  return report;
}

} // namespace pnpmri
