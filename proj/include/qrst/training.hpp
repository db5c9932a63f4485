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

#include <cstdint>
#include <string>
#include <vector>

#include "qrst/dynamics.hpp"
#include "qrst/linalg.hpp"
#include "qrst/rng.hpp"
#include "qrst/states.hpp"
#include "qrst/wigner.hpp"

namespace qrst {

enum class TargetKind { bloch_vector, wigner_grid };
enum class FamilyKind { ginibre, noisy_bell, squeezed_thermal };

inline const char* to_string(TargetKind k) { return k == TargetKind::bloch_vector ? "bloch_vector" : "wigner_grid"; }

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::ginibre: return "ginibre";
    case FamilyKind::noisy_bell: return "noisy_bell";
    case FamilyKind::squeezed_thermal: return "squeezed_thermal";
  }
  return "?";
}

/// Which input states are drawn, how they enter the reservoir, and what the
/// readout is trained to reproduce.
struct StateFamily {
  FamilyKind kind = FamilyKind::ginibre;
  int dim = 2;                  // Hilbert-space dimension D (finite families)
  std::vector<int> input_dims;  // input-mode factors in the joint layout
  SqueezedThermalRanges cv_ranges;
  int max_cutoff = 16;  // Fock truncation of the input mode (continuous variable)
  PhaseGrid grid = default_grid();

  /// D = 4 is carried by two qubits, every other D by one D-level mode.
  static StateFamily ginibre(int d) {
    StateFamily f;
    f.kind = FamilyKind::ginibre;
    f.dim = d;
    f.input_dims = d == 4 ? std::vector<int>{2, 2} : std::vector<int>{d};
    return f;
  }

  static StateFamily noisy_bell() {
    StateFamily f;
    f.kind = FamilyKind::noisy_bell;
    f.dim = 4;
    f.input_dims = {2, 2};
    return f;
  }

  static StateFamily squeezed_thermal(SqueezedThermalRanges ranges = {}, int max_cutoff = 16,
                                      PhaseGrid grid = default_grid()) {
    StateFamily f;
    f.kind = FamilyKind::squeezed_thermal;
    f.cv_ranges = ranges;
    f.max_cutoff = max_cutoff;
    f.dim = max_cutoff;
    f.input_dims = {max_cutoff};
    f.grid = std::move(grid);
    return f;
  }

  TargetKind target_kind() const {
    return kind == FamilyKind::squeezed_thermal ? TargetKind::wigner_grid : TargetKind::bloch_vector;
  }

  Eigen::Index target_size() const {
    return target_kind() == TargetKind::bloch_vector ? static_cast<Eigen::Index>(dim) * dim - 1
                                                     : static_cast<Eigen::Index>(grid.points());
  }
};

/// 2 D^2 for finite-dimensional families, 96 for squeezed-thermal states.
inline int default_training_count(const StateFamily& family) {
  return family.kind == FamilyKind::squeezed_thermal ? 96 : 2 * family.dim * family.dim;
}

struct FamilySample {
  ComplexMatrix rho;
  RealVector target;
};

inline FamilySample draw_state(const StateFamily& family, Rng& rng) {
  FamilySample s;
  switch (family.kind) {
    case FamilyKind::ginibre:
      s.rho = sample_random_state(family.dim, rng).matrix;
      break;
    case FamilyKind::noisy_bell:
      s.rho = noisy_bell(sample_noisy_bell_params(rng)).matrix;
      break;
    case FamilyKind::squeezed_thermal: {
      const SqueezedThermalParams p = sample_squeezed_thermal_params(family.cv_ranges, rng);
      if (p.cutoff > family.max_cutoff)
        throw CutoffTooSmall("state needs cutoff " + std::to_string(p.cutoff) + " > max_cutoff " +
                             std::to_string(family.max_cutoff));
      s.rho = squeezed_thermal(p).matrix;
      s.target = wigner(s.rho, family.grid).flatten();
      return s;
    }
  }
  s.target = bloch_coefficients(s.rho);
  return s;
}

enum class ReadoutRoute { povm, direct };

/// Readouts for one reservoir, either by forward simulation per state or
/// through the precomputed POVM elements.
class ReadoutSource {
 public:
  ReadoutSource(const ProtocolRunner& runner, ReadoutRoute route) : runner_(&runner), route_(route) {
    if (route_ == ReadoutRoute::povm) povm_ = runner.readout_povm();
  }

  ReadoutRoute route() const { return route_; }
  const ProtocolRunner& runner() const { return *runner_; }

  ReadoutVector operator()(const ComplexMatrix& rho_in) const {
    if (route_ == ReadoutRoute::povm) return povm_.readout(rho_in);
    const Eigen::Index d = runner_->input_dim();
    if (rho_in.rows() < d && runner_->input_dims().size() == 1) {
      ComplexMatrix padded = ComplexMatrix::Zero(d, d);
      padded.topLeftCorner(rho_in.rows(), rho_in.cols()) = rho_in;
      return runner_->run(padded);
    }
    return runner_->run(rho_in);
  }

 private:
  const ProtocolRunner* runner_;
  ReadoutRoute route_;
  ReadoutPovm povm_;
};

/// Samples in columns.
struct Dataset {
  RealMatrix readouts;
  RealMatrix targets;
  std::vector<ComplexMatrix> states;

  Eigen::Index count() const { return readouts.cols(); }
};

/// State i is drawn from its own stream derive_seed(seed, {i}), so the
/// dataset does not depend on evaluation order.
inline Dataset build_dataset(const StateFamily& family, int count, const ReadoutSource& source, std::uint64_t seed) {
  if (count < 1) throw EmptyInput("dataset count must be >= 1");
  std::vector<FamilySample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    samples.push_back(draw_state(family, rng));
  }
  Dataset ds;
  for (int i = 0; i < count; ++i) {
    const ReadoutVector r = source(samples[static_cast<std::size_t>(i)].rho);
    if (i == 0) {
      ds.readouts.resize(r.size(), count);
      ds.targets.resize(samples[0].target.size(), count);
    }
    ds.readouts.col(i) = r.values;
    ds.targets.col(i) = samples[static_cast<std::size_t>(i)].target;
    ds.states.push_back(std::move(samples[static_cast<std::size_t>(i)].rho));
  }
  return ds;
}

inline Dataset build_dataset(const StateFamily& family, int count, const ReservoirSpec& spec,
                             const ProtocolParams& params, std::uint64_t seed,
                             ReadoutRoute route = ReadoutRoute::povm) {
  const ProtocolRunner runner(spec, params, family.input_dims);
  return build_dataset(family, count, ReadoutSource(runner, route), seed);
}

/// Y = m_out * n + m_const.
struct TrainedReadoutMap {
  RealMatrix m_out;
  RealVector m_const;
  double lambda = 0.0;            // relative regularization as requested
  double lambda_effective = 0.0;  // absolute value used in the solve
  TargetKind target_kind = TargetKind::bloch_vector;
  std::vector<int> target_dims;  // {D} or {nx, np}
  PhaseGrid grid;                // Wigner targets only
  std::string reservoir_fingerprint;
  ProtocolParams protocol;
  std::vector<int> input_dims;

  RealVector apply(const RealVector& readout) const { return m_out * readout + m_const; }
};

inline constexpr double kDefaultRidgeLambda = 1e-12;

/// Ridge fit with an unregularized bias. Equivalent to augmenting the
/// readouts with a constant row excluded from the penalty: both sides are
/// centred, the weights are solved on the centred data, and the bias
/// restores the means. `lambda` is relative to the mean eigenvalue of the
/// centred readout Gram matrix. lambda = 0 gives the minimum-norm
/// least-squares solution.
inline TrainedReadoutMap fit(const RealMatrix& readouts, const RealMatrix& targets, double lambda) {
  if (readouts.cols() != targets.cols())
    throw DimMismatch("readouts have " + std::to_string(readouts.cols()) + " samples, targets " +
                      std::to_string(targets.cols()));
  if (readouts.cols() < 1) throw EmptyInput("fit needs at least one sample");
  const RealVector x_mean = readouts.rowwise().mean();
  const RealVector y_mean = targets.rowwise().mean();
  const RealMatrix xc = readouts.colwise() - x_mean;
  const RealMatrix yc = targets.colwise() - y_mean;

  TrainedReadoutMap map;
  map.lambda = lambda;
  const double scale = xc.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, readouts.rows()));
  if (lambda > 0.0) {
    map.lambda_effective = lambda * (scale > 0.0 ? scale : 1.0);
    map.m_out = solve_regularized(xc, yc, map.lambda_effective);
  } else {
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(xc.transpose());
    map.m_out = cod.solve(yc.transpose()).transpose();
  }
  map.m_const = y_mean - map.m_out * x_mean;
  return map;
}

/// Fit plus the metadata that binds the map to its reservoir and protocol.
inline TrainedReadoutMap train(const StateFamily& family, const Dataset& data, const ProtocolRunner& runner,
                               double lambda = kDefaultRidgeLambda) {
  TrainedReadoutMap map = fit(data.readouts, data.targets, lambda);
  map.target_kind = family.target_kind();
  if (map.target_kind == TargetKind::bloch_vector) {
    map.target_dims = {family.dim};
  } else {
    map.target_dims = {static_cast<int>(family.grid.x.size()), static_cast<int>(family.grid.p.size())};
    map.grid = family.grid;
  }
  map.reservoir_fingerprint = runner.reservoir_fingerprint();
  map.protocol = runner.params();
  map.input_dims = family.input_dims;
  return map;
}

}  // namespace qrst
