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
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qrst/linalg.hpp"
#include "qrst/qops.hpp"
#include "qrst/rng.hpp"

namespace qrst {

/// Unit-trace, Hermitian, positive semidefinite matrix. Construct through
/// `checked` unless the caller's construction guarantees the invariants.
struct DensityMatrix {
  ComplexMatrix matrix;

  int dim() const { return static_cast<int>(matrix.rows()); }

  static DensityMatrix checked(ComplexMatrix m, double tol = 1e-10, double negative_tol = 1e-9) {
    if (m.rows() != m.cols()) throw NonSquare("density matrix must be square");
    const double defect = hermiticity_defect(m);
    if (defect > tol) throw NonHermitianInput("density matrix Hermiticity defect " + std::to_string(defect));
    const double trace_error = std::abs(m.trace() - cplx(1.0));
    if (trace_error > tol) throw NotPositive("density matrix trace deviates from 1 by " + std::to_string(trace_error));
    const double lowest = hermitian_eig(m, tol).values(0);
    if (lowest < -negative_tol) throw NotPositive("min eigenvalue " + std::to_string(lowest));
    return DensityMatrix{std::move(m)};
  }
};

struct BlochVector {
  int dim = 2;
  RealVector s;
};

/// (1/D)(I + sum_i s_i z_i) without the positivity check.
inline ComplexMatrix bloch_to_matrix(int dim, const RealVector& s) {
  const auto gens = su_generators(dim);
  if (s.size() != static_cast<Eigen::Index>(gens.size()))
    throw DimMismatch("Bloch vector length " + std::to_string(s.size()) + ", expected " + std::to_string(gens.size()));
  ComplexMatrix rho = ComplexMatrix::Identity(dim, dim);
  for (std::size_t i = 0; i < gens.size(); ++i) rho += s(static_cast<Eigen::Index>(i)) * gens[i];
  return rho / static_cast<double>(dim);
}

inline DensityMatrix bloch_to_rho(const BlochVector& b) {
  ComplexMatrix rho = bloch_to_matrix(b.dim, b.s);
  const double lowest = hermitian_eig(rho).values(0);
  if (lowest < -1e-9) throw NotPositive("Bloch vector maps to min eigenvalue " + std::to_string(lowest));
  return DensityMatrix{std::move(rho)};
}

/// s_i = (D/2) Re Tr(rho z_i); valid for any Hermitian unit-trace matrix.
inline RealVector bloch_coefficients(const ComplexMatrix& rho) {
  const int dim = static_cast<int>(rho.rows());
  const auto gens = su_generators(dim);
  RealVector s(static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i)
    s(static_cast<Eigen::Index>(i)) = 0.5 * dim * (rho.cwiseProduct(gens[i].transpose())).sum().real();
  return s;
}

inline BlochVector rho_to_bloch(const DensityMatrix& rho) { return {rho.dim(), bloch_coefficients(rho.matrix)}; }

/// Hilbert-Schmidt (Ginibre) random state: G G^dagger / Tr(G G^dagger).
inline DensityMatrix sample_random_state(int d, Rng& rng) {
  if (d < 2) throw DimTooSmall("random state dimension " + std::to_string(d));
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = cplx(re, im);
    }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix{hermitian_part(rho)};
}

struct NoisyBellParams {
  double epsilon = 0.0;
  double phi = 0.0;

  bool in_training_range() const {
    return epsilon >= 0.0 && epsilon <= 0.2 && phi >= 0.0 && phi < 2.0 * std::numbers::pi;
  }
};

/// (1 - eps)|psi><psi| + (eps/4) I with |psi> = (|00> + e^{-i phi}|11>)/sqrt(2).
inline DensityMatrix noisy_bell(const NoisyBellParams& p) {
  if (p.epsilon < 0.0 || p.epsilon > 1.0) throw NotPositive("noisy Bell epsilon outside [0, 1]");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi(0) = 1.0 / std::sqrt(2.0);
  psi(3) = std::polar(1.0 / std::sqrt(2.0), -p.phi);
  ComplexMatrix rho = (1.0 - p.epsilon) * psi * psi.adjoint();
  rho += ComplexMatrix::Identity(4, 4) * (p.epsilon / 4.0);
  return DensityMatrix{std::move(rho)};
}

inline NoisyBellParams sample_noisy_bell_params(Rng& rng) {
  std::uniform_real_distribution<double> eps(0.0, 0.2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double e = eps(rng);
  return {e, phase(rng)};
}

struct SqueezedThermalParams {
  double r = 0.0;      // squeeze magnitude
  double theta = 0.0;  // squeeze phase
  double n_th = 0.0;   // thermal occupation
  int cutoff = 2;      // Fock truncation
};

inline constexpr double kFockTailTolerance = 1e-6;

namespace detail {

/// Squeezed-thermal state in a working Fock space of size `working`; the
/// top of that space is far enough from the populated levels that the
/// truncated exponential is exact to round-off there.
inline ComplexMatrix squeezed_thermal_working(double r, double theta, double n_th, int working) {
  ComplexMatrix thermal = ComplexMatrix::Zero(working, working);
  if (n_th <= 0.0) {
    thermal(0, 0) = 1.0;
  } else {
    const double ratio = n_th / (1.0 + n_th);
    double p = 1.0 / (1.0 + n_th);
    for (int n = 0; n < working; ++n, p *= ratio) thermal(n, n) = p;
  }
  if (r == 0.0) return thermal;
  const ComplexMatrix a = local_lowering(working);
  const cplx xi = std::polar(r, theta);
  // S = exp(G), G = (xi^* a^2 - xi a^dagger^2)/2 anti-Hermitian; H = iG Hermitian.
  const ComplexMatrix g = 0.5 * (std::conj(xi) * a * a - xi * a.adjoint() * a.adjoint());
  const HermitianEigen eig = hermitian_eig(cplx(0.0, 1.0) * g, 1e-9);
  Eigen::VectorXcd phases(working);
  for (int i = 0; i < working; ++i) phases(i) = std::polar(1.0, -eig.values(i));
  const ComplexMatrix s = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
  return s * thermal * s.adjoint();
}

inline int working_size(int cutoff) { return std::max(2 * cutoff, cutoff + 40); }

}  // namespace detail

/// S(xi) rho_th S(xi)^dagger truncated to `cutoff` Fock levels and
/// renormalized. Throws CutoffTooSmall if the discarded population reaches
/// kFockTailTolerance.
inline DensityMatrix squeezed_thermal(const SqueezedThermalParams& p) {
  if (p.cutoff < 2) throw DimTooSmall("squeezed_thermal cutoff " + std::to_string(p.cutoff));
  if (p.n_th < 0.0 || p.r < 0.0) throw NotPositive("negative squeeze or thermal occupation");
  const int working = detail::working_size(p.cutoff);
  const ComplexMatrix full = detail::squeezed_thermal_working(p.r, p.theta, p.n_th, working);
  const double kept = full.diagonal().head(p.cutoff).real().sum();
  const double tail = full.diagonal().real().sum() - kept;
  if (tail >= kFockTailTolerance)
    throw CutoffTooSmall("population " + std::to_string(tail) + " above cutoff " + std::to_string(p.cutoff));
  ComplexMatrix rho = full.topLeftCorner(p.cutoff, p.cutoff) / kept;
  return DensityMatrix{hermitian_part(rho)};
}

inline double mean_photon_number(const ComplexMatrix& rho) {
  double n = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) n += static_cast<double>(i) * rho(i, i).real();
  return n / rho.trace().real();
}

/// Smallest cutoff c >= 2 with |nbar(c) - nbar(c + 5)| < tol and discarded
/// population below kFockTailTolerance, where nbar(c) is the mean photon
/// number of the state truncated to c levels and renormalized.
inline int find_effective_cutoff(double r, double theta, double n_th, double tol = 1e-4) {
  constexpr int kMaxCutoff = 200;
  int working = 64;
  while (true) {
    const ComplexMatrix full = detail::squeezed_thermal_working(r, theta, n_th, working);
    const RealVector pop = full.diagonal().real();
    const double total = pop.sum();
    auto nbar = [&](int c) {
      double mass = 0.0, moment = 0.0;
      for (int n = 0; n < c; ++n) {
        mass += pop(n);
        moment += n * pop(n);
      }
      return moment / mass;
    };
    const int limit = std::min(kMaxCutoff, working / 2 - 5);
    for (int c = 2; c <= limit; ++c) {
      const double tail = total - pop.head(c).sum();
      if (tail < kFockTailTolerance && std::abs(nbar(c) - nbar(c + 5)) < tol) return c;
    }
    if (limit >= kMaxCutoff) throw NoConvergence("effective cutoff exceeds " + std::to_string(kMaxCutoff));
    working *= 2;
  }
}

/// Sampling box for the continuous-variable family.
struct SqueezedThermalRanges {
  double r_max = 0.3;
  double n_th_max = 0.2;
};

inline SqueezedThermalParams sample_squeezed_thermal_params(const SqueezedThermalRanges& ranges, Rng& rng,
                                                            double cutoff_tol = 1e-4) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SqueezedThermalParams p;
  p.r = ranges.r_max * unit(rng);
  p.theta = 2.0 * std::numbers::pi * unit(rng);
  p.n_th = ranges.n_th_max * unit(rng);
  p.cutoff = find_effective_cutoff(p.r, p.theta, p.n_th, cutoff_tol);
  return p;
}

}  // namespace qrst
