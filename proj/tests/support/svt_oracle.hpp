#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pnpmri::testing {

// Singular-value thresholding from the eigen-decomposition of MᴴM, sharing no
// code with the SVD path: M V diag(max(s − tau, 0) / s) Vᴴ with s = √λ.
inline Eigen::MatrixXcd svt_eig_oracle(const Eigen::MatrixXcd &m, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m.adjoint() * m);
  Eigen::VectorXd gain(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < gain.size(); ++i) {
    const double s = std::sqrt(std::max(eig.eigenvalues()(i), 0.0));
    gain(i) = s > 0.0 ? std::max(s - tau, 0.0) / s : 0.0;
  }
  return m * eig.eigenvectors() * gain.asDiagonal() * eig.eigenvectors().adjoint();
}

} // namespace pnpmri::testing
