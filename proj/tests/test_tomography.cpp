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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qrst/tomography.hpp"
#include "test_util.hpp"

namespace qrst {
namespace {

using testing::max_abs;

ComplexMatrix diag(std::initializer_list<double> v) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

/// Random Hermitian unit-trace matrix with a spread spectrum.
ComplexMatrix random_unit_trace(Eigen::Index d, Rng& rng) {
  ComplexMatrix h = testing::random_hermitian(d, rng);
  h -= (h.trace() / static_cast<double>(d)) * ComplexMatrix::Identity(d, d);
  return 0.5 * h + ComplexMatrix::Identity(d, d) / static_cast<double>(d);
}

TrainedReadoutMap qubit_map(const ProtocolRunner& runner, const Dataset& data) {
  return train(StateFamily::ginibre(2), data, runner, 1e-12);
}

TEST(Fidelity, Examples) {
  Rng rng(61);
  const ComplexMatrix rho = testing::random_mixture(3, 2, rng);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(diag({1, 0}), diag({0, 1})), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(diag({1, 0}), diag({0.5, 0.5})), 0.5, 1e-12);
}

TEST(Fidelity, PureStateOverlapOracle) {
  Rng rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix psi = testing::random_complex(4, 1, rng);
    psi /= psi.norm();
    const ComplexMatrix sigma = testing::random_mixture(4, 3, rng);
    const double overlap = (psi.adjoint() * sigma * psi)(0, 0).real();
    EXPECT_NEAR(fidelity(psi * psi.adjoint(), sigma), overlap, 1e-8);
    EXPECT_NEAR(fidelity(sigma, psi * psi.adjoint()), overlap, 1e-8);
  }
}

TEST(Fidelity, SymmetricAndBounded) {
  Rng rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = testing::random_mixture(3, 1 + trial % 3, rng);
    const ComplexMatrix b = testing::random_mixture(3, 2, rng);
    const double f = fidelity(a, b);
    EXPECT_NEAR(f, fidelity(b, a), 1e-10);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-9);
  }
}

TEST(Fidelity, ClampsRoundOffRejectsUnphysical) {
  EXPECT_NEAR(fidelity(diag({1, 0}), diag({1.0 + 5e-7, -5e-7})), 1.0, 1e-6);
  EXPECT_THROW(fidelity(diag({1, 0}), diag({1.2, -0.2})), NotAState);
  EXPECT_THROW(fidelity(diag({1, 0}), diag({1, 0, 0})), DimMismatch);
}

TEST(WignerError, Examples) {
  const PhaseGrid grid = PhaseGrid::uniform(-3.0, 3.0, 13);
  ComplexMatrix vac = ComplexMatrix::Zero(3, 3);
  vac(0, 0) = 1.0;
  const WignerGrid w = wigner(vac, grid);
  EXPECT_EQ(wigner_error(w, w), 0.0);
  WignerGrid zero = w;
  zero.w.setZero();
  EXPECT_NEAR(wigner_error(w, zero), 1.0, 1e-15);
  WignerGrid negated = w;
  negated.w = -w.w;
  EXPECT_THROW(wigner_error(w, negated), DivisionDegenerate);
  WignerGrid other = wigner(vac, PhaseGrid::uniform(-3.0, 3.0, 15));
  EXPECT_THROW(wigner_error(w, other), GridMismatch);
}

TEST(WignerError, HandComputedValue) {
  PhaseGrid g = PhaseGrid::uniform(0.0, 1.0, 2);
  WignerGrid a{g, RealMatrix::Zero(2, 2)}, b{g, RealMatrix::Zero(2, 2)};
  a.w << 1, 0, 0, 1;
  b.w << 0, 0, 0, 1;
  // sqrt(1 / (1 + 4)).
  EXPECT_NEAR(wigner_error(a, b), std::sqrt(0.2), 1e-15);
}

TEST(MinEigenvalue, Examples) {
  EXPECT_NEAR(min_eigenvalue(ComplexMatrix::Identity(2, 2) / 2.0), 0.5, 1e-15);
  EXPECT_NEAR(min_eigenvalue(diag({1.2, -0.2})), -0.2, 1e-15);
  Rng rng(64);
  EXPECT_GE(min_eigenvalue(sample_random_state(4, rng).matrix), -1e-9);
  ComplexMatrix skew = diag({0.5, 0.5});
  skew(0, 1) = 0.1;
  EXPECT_THROW(min_eigenvalue(skew), NonHermitian);
}

TEST(ProjectPhysical, Examples) {
  Rng rng(65);
  const ComplexMatrix valid = testing::random_mixture(3, 2, rng);
  EXPECT_EQ(project_physical(valid), valid);
  EXPECT_LT(max_abs(project_physical(diag({1.2, -0.2})) - diag({1.0, 0.0})), 1e-15);
  // Two negative eigenvalues: (0.9, 0.3, -0.1, -0.1) -> (0.8, 0.2, 0, 0).
  EXPECT_LT(max_abs(project_physical(diag({0.9, 0.3, -0.1, -0.1})) - diag({0.8, 0.2, 0.0, 0.0})), 1e-15);
  ComplexMatrix skew = diag({1.2, -0.2});
  skew(0, 1) = 0.1;
  EXPECT_THROW(project_physical(skew), NonHermitian);
}

TEST(ProjectPhysical, TwoLevelBruteForce) {
  // Minimise |diag(p, 1 - p) - diag(1.2, -0.2)| over p in [0, 1].
  double best_p = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 10000; ++i) {
    const double p = i / 10000.0;
    const double dist = (p - 1.2) * (p - 1.2) + (1 - p + 0.2) * (1 - p + 0.2);
    if (dist < best) best = dist, best_p = p;
  }
  EXPECT_NEAR(project_physical(diag({1.2, -0.2}))(0, 0).real(), best_p, 1e-12);
}

TEST(ProjectPhysical, GridSearchOracleOnSimplex) {
  Rng rng(66);
  int unphysical = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = random_unit_trace(3, rng);
    const HermitianEigen e = hermitian_eig(rho);
    if (e.values(0) >= 0.0) continue;
    ++unphysical;
    const ComplexMatrix proj = project_physical(rho);
    const double ours = (proj - rho).norm();
    // Dense grid over eigenvalue weights in the 2-simplex, eigenvectors fixed.
    double best = std::numeric_limits<double>::infinity();
    const int steps = 400;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; i + j <= steps; ++j) {
        RealVector mu(3);
        mu << static_cast<double>(i) / steps, static_cast<double>(j) / steps, static_cast<double>(steps - i - j) / steps;
        best = std::min(best, (mu - e.values).norm());
      }
    EXPECT_LE(ours, best + 1e-12);
    EXPECT_GE(ours, best - 2.0 / steps);
    EXPECT_GE(min_eigenvalue(proj), -1e-14);
  }
  EXPECT_GT(unphysical, 5);
}

TEST(ProjectPhysical, TraceAndContraction) {
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = random_unit_trace(4, rng);
    const ComplexMatrix proj = project_physical(rho);
    EXPECT_NEAR(proj.trace().real(), 1.0, 1e-14);
    for (int k = 0; k < 5; ++k) {
      const ComplexMatrix sigma = testing::random_mixture(4, 1 + k, rng);
      EXPECT_LE((proj - sigma).norm(), (rho - sigma).norm() + 1e-12);
    }
  }
}

class TrainedQubit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    runner_ = new ProtocolRunner(sample_reservoir({3, 1.0, 1.0, 0.3, 1}, 21), ProtocolParams{}, {2});
    source_ = new ReadoutSource(*runner_, ReadoutRoute::povm);
    data_ = new Dataset(build_dataset(StateFamily::ginibre(2), 8, *source_, 5));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete source_;
    delete runner_;
  }
  static inline ProtocolRunner* runner_ = nullptr;
  static inline ReadoutSource* source_ = nullptr;
  static inline Dataset* data_ = nullptr;
};

TEST_F(TrainedQubit, ReproducesTrainingStates) {
  const TrainedReadoutMap map = qubit_map(*runner_, *data_);
  for (Eigen::Index i = 0; i < data_->count(); ++i) {
    const ComplexMatrix rho = reconstruct(map, (*source_)(data_->states[static_cast<std::size_t>(i)])).rho;
    EXPECT_LT(max_abs(rho - data_->states[static_cast<std::size_t>(i)]), 1e-6);
  }
}

TEST_F(TrainedQubit, ZeroMapIsConstant) {
  TrainedReadoutMap map = qubit_map(*runner_, *data_);
  map.m_out.setZero();
  map.m_const << 0.1, -0.2, 0.3;
  ComplexMatrix expect(2, 2);
  expect << 1.3, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.7;
  expect /= 2.0;
  Rng rng(68);
  for (int i = 0; i < 3; ++i)
    EXPECT_LT(max_abs(reconstruct(map, (*source_)(testing::random_mixture(2, 2, rng))).rho - expect), 1e-15);
}

TEST_F(TrainedQubit, AffineComposition) {
  const TrainedReadoutMap map = qubit_map(*runner_, *data_);
  Rng rng(69);
  const ComplexMatrix a = testing::random_mixture(2, 1, rng);
  const ComplexMatrix b = testing::random_mixture(2, 2, rng);
  const double alpha = 0.3;
  // Forward simulation, so the check covers the protocol rather than the POVM shortcut.
  const ComplexMatrix mixed = reconstruct(map, runner_->run(alpha * a + (1 - alpha) * b)).rho;
  const ComplexMatrix combined =
      alpha * reconstruct(map, runner_->run(a)).rho + (1 - alpha) * reconstruct(map, runner_->run(b)).rho;
  EXPECT_LT(max_abs(mixed - combined), 1e-6);
}

TEST_F(TrainedQubit, GuardsBindingAndLength) {
  const TrainedReadoutMap map = qubit_map(*runner_, *data_);
  ReadoutVector r = (*source_)(ComplexMatrix::Identity(2, 2) / 2.0);
  ReadoutVector foreign = r;
  foreign.reservoir_fingerprint = "0000000000000000";
  EXPECT_THROW(reconstruct(map, foreign), FingerprintMismatch);
  ReadoutVector shorter = r;
  shorter.values = r.values.head(2);
  EXPECT_THROW(reconstruct(map, shorter), DimMismatch);
}

TEST_F(TrainedQubit, EvaluateReportsOneMetric) {
  const TrainedReadoutMap map = qubit_map(*runner_, *data_);
  Rng rng(70);
  const ComplexMatrix truth = testing::random_mixture(2, 2, rng);
  const ReconstructionReport rep = evaluate(map, (*source_)(truth), truth);
  ASSERT_TRUE(rep.fidelity.has_value());
  EXPECT_FALSE(rep.wigner_error.has_value());
  EXPECT_NEAR(*rep.fidelity, 1.0, 1e-6);
  EXPECT_FALSE(rep.projected);

  // An unphysical output has no fidelity unless projected; the raw min eigenvalue is kept.
  TrainedReadoutMap biased = map;
  biased.m_out.setZero();
  biased.m_const << 0.0, 0.0, 1.4;
  EXPECT_THROW(evaluate(biased, (*source_)(truth), truth, false), NotAState);
  const ReconstructionReport proj = evaluate(biased, (*source_)(truth), truth, true);
  EXPECT_TRUE(proj.projected);
  EXPECT_NEAR(proj.min_eigenvalue, -0.2, 1e-12);
  EXPECT_NEAR(*proj.fidelity, truth(0, 0).real(), 1e-10);
}

}  // namespace
}  // namespace qrst
