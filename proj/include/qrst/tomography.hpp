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
#include <limits>
#include <optional>
#include <string>

#include "qrst/dynamics.hpp"
#include "qrst/linalg.hpp"
#include "qrst/states.hpp"
#include "qrst/training.hpp"
#include "qrst/wigner.hpp"

namespace qrst {

inline constexpr double kFidelityNegativeTol = 1e-6;

/// Raw output of a trained map: a Hermitian unit-trace matrix that may have
/// negative eigenvalues, or a Wigner grid.
struct Reconstruction {
  TargetKind kind = TargetKind::bloch_vector;
  ComplexMatrix rho;
  WignerGrid wigner;
};

inline Reconstruction reconstruct(const TrainedReadoutMap& map, const ReadoutVector& readout) {
  if (!readout.reservoir_fingerprint.empty() && !map.reservoir_fingerprint.empty() &&
      readout.reservoir_fingerprint != map.reservoir_fingerprint)
    throw FingerprintMismatch("readout from reservoir " + readout.reservoir_fingerprint + ", map trained on " +
                              map.reservoir_fingerprint);
  if (readout.size() != map.m_out.cols())
    throw DimMismatch("readout length " + std::to_string(readout.size()) + ", map expects " +
                      std::to_string(map.m_out.cols()));
  const RealVector y = map.apply(readout.values);
  Reconstruction out;
  out.kind = map.target_kind;
  if (map.target_kind == TargetKind::bloch_vector)
    out.rho = bloch_to_matrix(map.target_dims.at(0), y);
  else
    out.wigner = WignerGrid::unflatten(map.grid, y);
  return out;
}

inline double min_eigenvalue(const ComplexMatrix& rho_like) {
  if (rho_like.rows() != rho_like.cols()) throw NonSquare("min_eigenvalue needs a square matrix");
  const double defect = hermiticity_defect(rho_like);
  if (defect > 1e-10) throw NonHermitian("Hermiticity defect " + std::to_string(defect));
  return hermitian_eig(rho_like).values(0);
}

namespace detail {

/// Eigenvalues below this fraction of the largest are round-off: their
/// square roots (about 3e-9 for 1e-17) would dominate the fidelity error
/// of rank-deficient states.
inline constexpr double kFidelityRankCut = 1e-14;

/// X with X X^dagger = m after clamping; rejects eigenvalues below
/// -kFidelityNegativeTol.
inline ComplexMatrix fidelity_factor(const ComplexMatrix& m, const char* which) {
  const HermitianEigen e = hermitian_eig(m);
  if (e.values(0) < -kFidelityNegativeTol)
    throw NotAState(std::string(which) + " has eigenvalue " + std::to_string(e.values(0)));
  const double cut = kFidelityRankCut * std::max(1.0, e.values.maxCoeff());
  const RealVector roots = e.values.unaryExpr([cut](double v) { return v > cut ? std::sqrt(v) : 0.0; });
  return e.vectors * roots.cast<cplx>().asDiagonal();
}

}  // namespace detail

/// (Tr sqrt(sqrt(a) b sqrt(a)))^2, evaluated as the squared nuclear norm of
/// X^dagger Y for factors a = X X^dagger, b = Y Y^dagger. Singular values
/// need no further square root, so the result is symmetric and accurate
/// to round-off for rank-deficient states. Eigenvalues in [-1e-6, 0) of
/// either argument are treated as round-off and clipped.
inline double fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimMismatch("fidelity of " + std::to_string(a.rows()) + " and " + std::to_string(b.rows()) + " dim states");
  const ComplexMatrix x = detail::fidelity_factor(a, "first state");
  const ComplexMatrix y = detail::fidelity_factor(b, "second state");
  const ComplexMatrix overlap = x.adjoint() * y;
  const double t = Eigen::JacobiSVD<ComplexMatrix>(overlap).singularValues().sum();
  return t * t;
}

/// sqrt(sum (W - W')^2 / sum (W + W')^2) over the grid.
inline double wigner_error(const WignerGrid& true_w, const WignerGrid& tomo_w) {
  if (!(true_w.grid == tomo_w.grid) || true_w.w.rows() != tomo_w.w.rows() || true_w.w.cols() != tomo_w.w.cols())
    throw GridMismatch("Wigner grids differ");
  const double num = (true_w.w - tomo_w.w).squaredNorm();
  const double den = (true_w.w + tomo_w.w).squaredNorm();
  if (den < 1e-12) throw DivisionDegenerate("sum of (W + W_tomo)^2 is " + std::to_string(den));
  return std::sqrt(num / den);
}

/// Frobenius-nearest unit-trace PSD matrix. The eigenvectors are kept and the
/// spectrum is projected onto the probability simplex: going from the
/// smallest eigenvalue upward, an eigenvalue is zeroed while it stays
/// negative after sharing the accumulated deficit with the larger ones.
inline constexpr double kProjectionRoundoff = 1e-14;

inline ComplexMatrix project_physical(const ComplexMatrix& rho_like) {
  if (rho_like.rows() != rho_like.cols()) throw NonSquare("project_physical needs a square matrix");
  const double defect = hermiticity_defect(rho_like);
  if (defect > 1e-10) throw NonHermitian("Hermiticity defect " + std::to_string(defect));
  const HermitianEigen e = hermitian_eig(rho_like);
  const Eigen::Index d = e.values.size();
  RealVector mu = e.values.array() + (1.0 - e.values.sum()) / static_cast<double>(d);  // ascending
  if (mu(0) >= -kProjectionRoundoff) return rho_like;  // PSD up to round-off: a fixed point
  Eigen::Index first_kept = 0;
  double deficit = 0.0;
  while (first_kept < d && mu(first_kept) + deficit / static_cast<double>(d - first_kept) < 0.0) {
    deficit += mu(first_kept);
    mu(first_kept) = 0.0;
    ++first_kept;
  }
  const double share = deficit / static_cast<double>(d - first_kept);
  for (Eigen::Index i = first_kept; i < d; ++i) mu(i) += share;
  return hermitian_part(e.vectors * mu.asDiagonal() * e.vectors.adjoint());
}

/// Exactly one of `fidelity` and `wigner_error` is set.
struct ReconstructionReport {
  Reconstruction reconstructed;
  std::optional<double> fidelity;
  std::optional<double> wigner_error;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  bool projected = false;
};

/// With `project`, finite-D reconstructions with a negative eigenvalue are
/// replaced by their nearest physical state before the fidelity is taken;
/// min_eigenvalue always describes the raw reconstruction.
inline ReconstructionReport evaluate(const TrainedReadoutMap& map, const ReadoutVector& readout,
                                     const ComplexMatrix& truth, bool project = false) {
  ReconstructionReport rep;
  rep.reconstructed = reconstruct(map, readout);
  if (rep.reconstructed.kind == TargetKind::bloch_vector) {
    rep.min_eigenvalue = min_eigenvalue(rep.reconstructed.rho);
    if (project && rep.min_eigenvalue < 0.0) {
      rep.reconstructed.rho = project_physical(rep.reconstructed.rho);
      rep.projected = true;
    }
    rep.fidelity = fidelity(truth, rep.reconstructed.rho);
  } else {
    rep.wigner_error = wigner_error(wigner(truth, map.grid), rep.reconstructed.wigner);
  }
  return rep;
}

}  // namespace qrst
