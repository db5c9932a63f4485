// Copyright 2026 The QRST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qrst/error.hpp"

namespace qrst {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Sparse operator on a composite Hilbert space. The propagators only form
/// dense * sparse products, which stream over dense columns.
using SparseOperator = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// max |A - A^dagger|
inline double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw NonSquare("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

/// Standard Kronecker ordering: block (i, j) of the result is a(i, j) * b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

inline HermitianEigen hermitian_eig(const ComplexMatrix& a, double tol = 1e-10) {
  const double defect = hermiticity_defect(a);
  if (defect > tol)
    throw NonHermitianInput("max |A - A^dagger| = " + std::to_string(defect));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) throw NonHermitianInput("eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues in
/// [-negative_tol, 0) are treated as zero.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& a, double negative_tol = 1e-9) {
  const HermitianEigen eig = hermitian_eig(a);
  if (eig.values.size() > 0 && eig.values(0) < -negative_tol)
    throw NegativeEigenvalue("min eigenvalue " + std::to_string(eig.values(0)));
  const RealVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * roots.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

/// Largest absolute eigenvalue of a real symmetric matrix.
inline double spectral_radius(const RealMatrix& a) {
  if (a.rows() != a.cols()) throw NonSquare("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Ridge solution W = y x^T (x x^T + lambda I)^{-1} for samples stored in
/// columns. Solved as the stacked least-squares problem
/// [x^T; sqrt(lambda) I] W^T = [y^T; 0], which has the same minimizer but
/// squares the condition number only implicitly.
inline RealMatrix solve_regularized(const RealMatrix& x, const RealMatrix& y, double lambda) {
  if (x.cols() != y.cols())
    throw DimMismatch("x has " + std::to_string(x.cols()) + " samples, y has " + std::to_string(y.cols()));
  if (lambda < 0.0) throw SingularSystem("negative regularization");
  const Eigen::Index features = x.rows();
  const Eigen::Index samples = x.cols();
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<RealMatrix> qr(x.transpose());
    if (qr.rank() < features)
      throw SingularSystem("x x^T has rank " + std::to_string(qr.rank()) + " < " + std::to_string(features));
    return qr.solve(y.transpose()).transpose();
  }
  RealMatrix lhs = RealMatrix::Zero(samples + features, features);
  lhs.topRows(samples) = x.transpose();
  lhs.bottomRows(features).diagonal().setConstant(std::sqrt(lambda));
  RealMatrix rhs = RealMatrix::Zero(samples + features, y.rows());
  rhs.topRows(samples) = y.transpose();
  return lhs.colPivHouseholderQr().solve(rhs).transpose();
}

}  // namespace qrst
