#include "pnpmri/errors.hpp"
#include "pnpmri/fft.hpp"
#include "pnpmri/linalg.hpp"
#include "pnpmri/regularizers.hpp"
#include "pnpmri/solvers.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>

namespace pnpmri {

namespace {

using Clock = std::chrono::steady_clock;

struct SvtResult {
  Eigen::MatrixXcd matrix;
  double nuclear_norm = 0.0;
};

SvtResult svt_impl(const Eigen::MatrixXcd &m, double tau) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("svt: SVD failed");
  }
  Eigen::VectorXd s = svd.singularValues();
  SvtResult out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = std::max(s(i) - tau, 0.0);
    out.nuclear_norm += s(i);
  }
  out.matrix = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
  return out;
}

} // namespace

Eigen::MatrixXcd svt(const Eigen::MatrixXcd &m, double tau) {
  if (!(tau >= 0.0)) {
    throw ParameterError("svt: threshold must be non-negative");
  }
  return svt_impl(m, tau).matrix;
}

Eigen::MatrixXcd to_casorati(const ComplexImage &x) {
  const Eigen::Index npix = Eigen::Index(x.nx() * x.ny());
  const Eigen::Index nt = Eigen::Index(x.nt());
  // frames are contiguous, so column-major storage is exactly the Casorati layout
  return Eigen::Map<const Eigen::MatrixXcd>(x.values().data(), npix, nt);
}

ComplexImage from_casorati(const Eigen::MatrixXcd &m, const ImageShape &shape) {
  if (std::size_t(m.rows()) != shape.frame_size() || std::size_t(m.cols()) != shape.nt) {
    throw DimensionError("from_casorati: matrix does not match image shape");
  }
  ComplexImage x(shape);
  Eigen::Map<Eigen::MatrixXcd>(x.values().data(), m.rows(), m.cols()) = m;
  return x;
}

SolveReport lps(const MultiCoilKSpace &d, const SenseModel &model, double lambda_L, double lambda_S,
                std::size_t iters) {
  if (!(lambda_L >= 0.0) || !(lambda_S >= 0.0)) {
    throw ParameterError("lps: thresholds must be non-negative");
  }
  const auto t0 = Clock::now();
  const ComplexImage aty = sense_adjoint(d, model);
  const ImageShape shape = aty.shape();

  ComplexImage m = aty;
  ComplexImage s(shape);
  ComplexImage l_prev = m;
  ComplexImage x = m;

  Eigen::BDCSVD<Eigen::MatrixXcd> svd0(to_casorati(m));
  const double sigma_max = svd0.singularValues().size() ? svd0.singularValues()(0) : 0.0;
  const double tau_L = lambda_L * sigma_max;

  SolveReport report;
  report.solver = "lps";
  for (std::size_t k = 1; k <= iters; ++k) {
    const SvtResult low = svt_impl(to_casorati(m - s), tau_L);
    ComplexImage l = from_casorati(low.matrix, shape);
    const ComplexImage sparse_t = soft_threshold(fft_t(m - l_prev), lambda_S);
    s = ifft_t(sparse_t);

    ComplexImage x_next = l + s;
    const double moved = l2_norm(x_next - x);
    x = std::move(x_next);

    ComplexImage gram = sense_gram(x, model);
    m = x;
    m -= gram;
    m += aty;
    l_prev = std::move(l);

    if (!x.all_finite()) {
      throw DivergenceError("lps: iterate became non-finite");
    }
    IterationRecord rec;
    rec.iteration = k;
    rec.data_fidelity = data_fidelity(x, d, model);
    rec.primal_residual = moved;
    rec.objective = rec.data_fidelity + tau_L * low.nuclear_norm + lambda_S * l1_norm(sparse_t.values());
    rec.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    report.iterations.push_back(rec);
  }
  report.image = std::move(x);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

} // namespace pnpmri
