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
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "qrst/dynamics.hpp"
#include "qrst/error.hpp"
#include "qrst/linalg.hpp"
#include "qrst/rng.hpp"

namespace qrst {

struct NoiseConfig {
  double sigma_r = 0.0;   // statistical, fresh per state
  double sigma_s = 0.0;   // systematic, frozen per readout element
  int n_repetitions = 0;  // shot-noise averaging; 0 disables
  std::uint64_t seed = 0;

  bool enabled() const { return sigma_r > 0.0 || sigma_s > 0.0 || n_repetitions > 0; }

  void validate() const {
    if (!(sigma_r >= 0.0)) throw ConfigError("noise.sigma_r must be >= 0");
    if (!(sigma_s >= 0.0)) throw ConfigError("noise.sigma_s must be >= 0");
    if (n_repetitions < 0) throw ConfigError("noise.n_repetitions must be >= 0");
  }
};

/// Number of readout elements pulled back into [0, 1].
struct ClampCounter {
  std::size_t events = 0;
};

namespace detail {

inline double clamp_unit(double v, ClampCounter* clamps) {
  if (v >= 0.0 && v <= 1.0) return v;
  if (clamps) ++clamps->events;
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace detail

/// n_j (1 + sigma_r g), one standard Gaussian g per element.
inline ReadoutVector apply_statistical(ReadoutVector readout, double sigma_r, Rng& rng,
                                       ClampCounter* clamps = nullptr) {
  if (sigma_r == 0.0) return readout;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < readout.size(); ++i)
    readout.values(i) = detail::clamp_unit(readout.values(i) * (1.0 + sigma_r * gauss(rng)), clamps);
  return readout;
}

/// Standard Gaussian gains, drawn once per experiment.
inline RealVector draw_site_gains(Eigen::Index length, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  RealVector g(length);
  for (Eigen::Index i = 0; i < length; ++i) g(i) = gauss(rng);
  return g;
}

inline ReadoutVector apply_systematic(ReadoutVector readout, double sigma_s, const RealVector& site_gains,
                                      ClampCounter* clamps = nullptr) {
  if (site_gains.size() != readout.size())
    throw GainLengthMismatch("gain vector length " + std::to_string(site_gains.size()) + ", readout length " +
                             std::to_string(readout.size()));
  if (sigma_s == 0.0) return readout;
  for (Eigen::Index i = 0; i < readout.size(); ++i)
    readout.values(i) = detail::clamp_unit(readout.values(i) * (1.0 + sigma_s * site_gains(i)), clamps);
  return readout;
}

/// Gaussian approximation of averaging N_r single-shot occupations.
inline ReadoutVector apply_shot_noise(ReadoutVector means, const RealVector& variances, int n_repetitions, Rng& rng,
                                      ClampCounter* clamps = nullptr) {
  if (n_repetitions < 1) throw ConfigError("n_repetitions must be >= 1");
  if (variances.size() != means.size())
    throw DimMismatch("variance length " + std::to_string(variances.size()) + ", readout length " +
                      std::to_string(means.size()));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double sd = std::sqrt(std::max(0.0, variances(i)) / n_repetitions);
    const double g = gauss(rng);
    if (sd > 0.0) means.values(i) = detail::clamp_unit(means.values(i) + sd * g, clamps);
  }
  return means;
}

/// Shot noise, then statistical, then systematic. Gains are frozen at
/// construction; each call consumes the caller's per-state stream.
class NoiseModel {
 public:
  NoiseModel() = default;
  NoiseModel(NoiseConfig config, Eigen::Index readout_length) : config_(config) {
    config_.validate();
    Rng rng(derive_seed(config_.seed, {stream::site_gains}));
    gains_ = draw_site_gains(readout_length, rng);
  }

  const NoiseConfig& config() const { return config_; }
  const RealVector& site_gains() const { return gains_; }

  ReadoutVector apply(ReadoutVector readout, Rng& rng, ClampCounter* clamps = nullptr) const {
    if (config_.n_repetitions > 0) {
      const RealVector variances = occupation_variances(readout);
      readout = apply_shot_noise(std::move(readout), variances, config_.n_repetitions, rng, clamps);
    }
    readout = apply_statistical(std::move(readout), config_.sigma_r, rng, clamps);
    return apply_systematic(std::move(readout), config_.sigma_s, gains_, clamps);
  }

 private:
  NoiseConfig config_;
  RealVector gains_;
};

}  // namespace qrst
