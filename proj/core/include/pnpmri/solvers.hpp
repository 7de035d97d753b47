#pragma once

#include "pnpmri/cg.hpp"
#include "pnpmri/denoisers.hpp"
#include "pnpmri/report.hpp"
#include "pnpmri/sense.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace pnpmri {

/// Argument of the denoiser in the ADMM x-update.
enum class DualUpdate {
  /// x_t = g(v_t + u_{t−1}): scaled-form ADMM whose fixed points satisfy
  /// x = g(x − ν∇f(x)).
  Standard,
  /// x_t = g(v_t − u_{t−1}): literal transcription kept for comparison. With
  /// u_t = u_{t−1} + v_t − x_t its fixed points satisfy ∇f(x) ∈ ∂φ(x) rather
  /// than 0 ∈ ∇f(x) + ∂φ(x).
  Reversed,
};

struct AdmmConfig {
  double nu = 1.0;
  std::size_t outer_iters = 20;
  std::size_t cg_iters = 5;
  double cg_tol = 1e-5;
  DenoiserSpec denoiser;
  DualUpdate dual = DualUpdate::Standard;

  void validate() const;
};

/// Starting point overriding x₀ = Aᴴd, u₀ = 0.
struct AdmmState {
  ComplexImage x;
  ComplexImage u;
};

/// Iterates handed to an observer after every outer iteration.
struct AdmmIterate {
  std::size_t t;
  const ComplexImage &v;
  const ComplexImage &x;
  const ComplexImage &u;
  const ComplexImage &u_prev;
};

using AdmmObserver = std::function<void(const AdmmIterate &)>;

/// Plug-and-play ADMM:
///   v_t = argmin_x ½‖Ax − d‖² + (1/2ν)‖x − (x_{t−1} − u_{t−1})‖²   (CG, warm start v_{t−1})
///   x_t = g(v_t ± u_{t−1})                                        (see DualUpdate)
///   u_t = u_{t−1} + (v_t − x_t)
SolveReport admm_pnp(const MultiCoilKSpace &d, const SenseModel &model, const AdmmConfig &cfg);
SolveReport admm_pnp(const MultiCoilKSpace &d, const SenseModel &model, const AdmmConfig &cfg,
                     const Denoiser &denoiser, const std::optional<AdmmState> &start = std::nullopt,
                     const AdmmObserver &observer = {});

/// How fista_uwt evaluates the proximal step of λ‖W_d ·‖₁.
enum class UwtProx {
  /// Soft-threshold the detail coefficients and synthesise (prox_uwt_l1).
  Thresholding,
  /// Exact prox via projected gradient on the dual (coefficients boxed by λ).
  Exact,
};

struct FistaOptions {
  /// Gradient step; must not exceed 1/‖AᴴA‖ (= 1 for unit-norm maps).
  double step = 1.0;
  UwtProx prox = UwtProx::Thresholding;
  /// Dual iterations per exact prox evaluation.
  std::size_t prox_iters = 50;
};

/// FISTA for ½‖Ax − d‖² + λ‖W_d x‖₁ with monotone restart: a candidate that
/// raises the objective is rejected and the momentum reset; the plain step
/// taken from the restarted point is always accepted.
SolveReport fista_uwt(const MultiCoilKSpace &d, const SenseModel &model, double lambda, std::size_t iters,
                      const FistaOptions &options = {});

/// Exact prox of tau‖W_d ·‖₁ evaluated by a fast dual projected gradient.
ComplexImage prox_uwt_l1_exact(const ComplexImage &z, double tau, std::size_t iters);

/// ADMM for ½‖Ax − d‖² + λ‖Dx‖₁ with split z = Dx and scaled dual u.
SolveReport admm_tv(const MultiCoilKSpace &d, const SenseModel &model, double lambda, double nu,
                    std::size_t outer_iters, std::size_t cg_iters, double cg_tol = 1e-5);

/// Singular-value soft-thresholding with absolute threshold tau.
Eigen::MatrixXcd svt(const Eigen::MatrixXcd &m, double tau);

/// Space × time Casorati matrix (rows = pixels, cols = frames) and back.
Eigen::MatrixXcd to_casorati(const ComplexImage &x);
ComplexImage from_casorati(const Eigen::MatrixXcd &m, const ImageShape &shape);

/// Low-rank plus sparse reconstruction. The singular-value threshold is
/// lambda_L times the largest singular value of the Casorati matrix of Aᴴd;
/// the sparse part is soft-thresholded by lambda_S in the temporal Fourier
/// domain.
SolveReport lps(const MultiCoilKSpace &d, const SenseModel &model, double lambda_L, double lambda_S,
                std::size_t iters);

} // namespace pnpmri
