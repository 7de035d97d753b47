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

// Dual of prox_{tau‖W_d·‖₁}(z): min_{|p| ≤ tau} ½‖z − W_dᴴp‖², solved by
// FISTA-accelerated projected gradient (step 1, since ‖W_d‖ ≤ 1). `p` is the
// warm start on entry and the final dual iterate on exit; band 0 stays zero.
ComplexImage exact_prox(const ComplexImage &z, double tau, std::size_t iters, UwtCoeffs &p) {
  const auto synth = [](const UwtCoeffs &q) { return uwt_adjoint(q); };
  UwtCoeffs r = p;
  double t = 1.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const ComplexImage resid = z - synth(r);
    const UwtCoeffs g = uwt_forward(resid);
    UwtCoeffs next = r;
    for (std::size_t b = 1; b < UwtCoeffs::kBands; ++b) {
      auto nv = next.bands[b].values();
      auto gv = g.bands[b].values();
      for (std::size_t i = 0; i < nv.size(); ++i) {
        cplx w = nv[i] + gv[i];
        const double mag = std::abs(w);
        if (mag > tau) {
          w *= tau / mag;
        }
        nv[i] = w;
      }
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (std::size_t b = 1; b < UwtCoeffs::kBands; ++b) {
      auto rv = r.bands[b].values();
      auto nv = next.bands[b].values();
      auto pv = p.bands[b].values();
      for (std::size_t i = 0; i < rv.size(); ++i) {
        rv[i] = nv[i] + momentum * (nv[i] - pv[i]);
      }
    }
    p = std::move(next);
    t = t_next;
  }
  return z - synth(p);
}

UwtCoeffs zero_coeffs(const ImageShape &shape) {
  UwtCoeffs c;
  for (auto &b : c.bands) {
    b = ComplexImage(shape);
  }
  return c;
}

} // namespace

ComplexImage prox_uwt_l1_exact(const ComplexImage &z, double tau, std::size_t iters) {
  if (!(tau >= 0.0)) {
    throw ParameterError("prox_uwt_l1_exact: tau must be non-negative");
  }
  UwtCoeffs p = zero_coeffs(z.shape());
  return exact_prox(z, tau, iters, p);
}

SolveReport fista_uwt(const MultiCoilKSpace &d, const SenseModel &model, double lambda, std::size_t iters,
                      const FistaOptions &options) {
  if (!(lambda >= 0.0)) {
    throw ParameterError("fista_uwt: lambda must be non-negative");
  }
  if (!(options.step > 0.0)) {
    throw ParameterError("fista_uwt: step must be positive");
  }
  const auto t0 = Clock::now();
  const ComplexImage aty = sense_adjoint(d, model);
  const double step = options.step;

  const auto objective = [&](const ComplexImage &x, double &fidelity) {
    fidelity = data_fidelity(x, d, model);
    return fidelity + lambda * uwt_detail_l1(x);
  };

  ComplexImage x = aty;
  ComplexImage y = x;
  double fidelity = 0.0;
  double obj = objective(x, fidelity);
  double t = 1.0;
  UwtCoeffs dual = zero_coeffs(x.shape());
  bool restarted = false;

  SolveReport report;
  report.solver = "fista-uwt";
  for (std::size_t k = 1; k <= iters; ++k) {
    ComplexImage grad = sense_gram(y, model);
    grad -= aty;
    ComplexImage w = y;
    axpy(-step, grad, w);
    ComplexImage cand = options.prox == UwtProx::Exact ? exact_prox(w, lambda * step, options.prox_iters, dual)
                                                       : prox_uwt_l1(w, lambda * step);
    double cand_fidelity = 0.0;
    const double cand_obj = objective(cand, cand_fidelity);
    if (!std::isfinite(cand_obj)) {
      throw DivergenceError("fista_uwt: objective became non-finite");
    }

    double moved = 0.0;
    // A plain proximal-gradient step (right after a restart) is always taken.
    if (cand_obj <= obj || restarted) {
      restarted = false;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      ComplexImage delta = cand - x;
      moved = l2_norm(delta);
      y = cand;
      axpy((t - 1.0) / t_next, delta, y);
      x = std::move(cand);
      obj = cand_obj;
      fidelity = cand_fidelity;
      t = t_next;
    } else {
      // restart from the last accepted iterate
      t = 1.0;
      y = x;
      restarted = true;
    }

    IterationRecord rec;
    rec.iteration = k;
    rec.data_fidelity = fidelity;
    rec.primal_residual = moved;
    rec.objective = obj;
    rec.elapsed_seconds = seconds_since(t0);
    report.iterations.push_back(rec);
  }
  report.image = std::move(x);
  report.wall_seconds = seconds_since(t0);
  return report;
}

} // namespace pnpmri
