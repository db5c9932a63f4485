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

#include "qrst/dynamics.hpp"
#include "qrst/noise.hpp"

namespace qrst {
namespace {

ReadoutVector readout_of(std::initializer_list<double> v) {
  ReadoutVector r;
  r.values.resize(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r.values(i++) = x;
  return r;
}

double sample_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TEST(NoiseConfig, Validation) {
  EXPECT_FALSE(NoiseConfig{}.enabled());
  EXPECT_TRUE((NoiseConfig{0.1, 0.0, 0, 1}).enabled());
  EXPECT_THROW((NoiseConfig{-0.1, 0.0, 0, 1}).validate(), ConfigError);
  EXPECT_THROW((NoiseConfig{0.0, -0.1, 0, 1}).validate(), ConfigError);
  EXPECT_THROW((NoiseConfig{0.0, 0.0, -1, 1}).validate(), ConfigError);
}

TEST(Statistical, ZeroSigmaAndZeroOccupation) {
  Rng rng(71);
  const ReadoutVector r = readout_of({0.2, 0.0, 0.7});
  EXPECT_EQ(apply_statistical(r, 0.0, rng).values, r.values);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(apply_statistical(r, 0.3, rng).values(1), 0.0);
}

TEST(Statistical, RelativeVarianceMonteCarlo) {
  Rng rng(72);
  const double sigma = 0.1, n = 0.4;
  std::vector<double> ratios;
  for (int i = 0; i < 10000; ++i) ratios.push_back(apply_statistical(readout_of({n}), sigma, rng).values(0) / n);
  const double s = sample_std(ratios);
  EXPECT_NEAR(s * s / (sigma * sigma), 1.0, 0.05);
}

TEST(Statistical, ClampsAndCounts) {
  Rng rng(73);
  ClampCounter clamps;
  for (int i = 0; i < 500; ++i) {
    const ReadoutVector out = apply_statistical(readout_of({0.95, 0.5}), 0.5, rng, &clamps);
    EXPECT_GE(out.values.minCoeff(), 0.0);
    EXPECT_LE(out.values.maxCoeff(), 1.0);
  }
  EXPECT_GT(clamps.events, 0u);
}

TEST(Systematic, FrozenGains) {
  Rng rng(74);
  const RealVector gains = draw_site_gains(3, rng);
  EXPECT_EQ(apply_systematic(readout_of({0.1, 0.2, 0.3}), 0.0, gains).values, readout_of({0.1, 0.2, 0.3}).values);
  const ReadoutVector a = apply_systematic(readout_of({0.1, 0.2, 0.3}), 0.2, gains);
  const ReadoutVector b = apply_systematic(readout_of({0.4, 0.5, 0.6}), 0.2, gains);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double factor = 1.0 + 0.2 * gains(i);
    if (factor * 0.6 <= 1.0 && factor >= 0.0) {
      EXPECT_NEAR(a.values(i) / (0.1 * (i + 1)), factor, 1e-12);
      EXPECT_NEAR(b.values(i) / (0.1 * (i + 4)), factor, 1e-12);
    }
  }
  EXPECT_EQ(apply_systematic(readout_of({0.1, 0.2, 0.3}), 0.2, gains).values, a.values);
  EXPECT_THROW(apply_systematic(readout_of({0.1}), 0.2, gains), GainLengthMismatch);
}

TEST(ShotNoise, LargeRepetitionLimitAndZeroVariance) {
  Rng rng(75);
  const ReadoutVector means = readout_of({0.3, 0.0, 1.0, 0.6});
  const RealVector var = occupation_variances(means);
  const ReadoutVector out = apply_shot_noise(means, var, 1000000000, rng);
  EXPECT_LT((out.values - means.values).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_EQ(out.values(1), 0.0);
  EXPECT_EQ(out.values(2), 1.0);
  EXPECT_THROW(apply_shot_noise(means, var, 0, rng), ConfigError);
  EXPECT_THROW(apply_shot_noise(means, var.head(2), 10, rng), DimMismatch);
}

TEST(ShotNoise, EmpiricalStdMonteCarlo) {
  Rng rng(76);
  const ReadoutVector means = readout_of({0.5});
  const RealVector var = occupation_variances(means);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(apply_shot_noise(means, var, 100, rng).values(0));
  EXPECT_NEAR(sample_std(xs) / 0.05, 1.0, 0.05);
}

TEST(NoiseModel, ReproducibleAndOrdered) {
  const NoiseConfig cfg{0.1, 0.2, 50, 1234};
  const NoiseModel model(cfg, 3);
  const NoiseModel twin(cfg, 3);
  EXPECT_EQ(model.site_gains(), twin.site_gains());
  Rng a(5), b(5);
  const ReadoutVector r = readout_of({0.2, 0.4, 0.6});
  EXPECT_EQ(model.apply(r, a).values, twin.apply(r, b).values);

  // Same stream, stages composed by hand in the declared order.
  Rng c(5), d(5);
  ReadoutVector manual = apply_shot_noise(r, occupation_variances(r), 50, c);
  manual = apply_statistical(manual, 0.1, c);
  manual = apply_systematic(manual, 0.2, model.site_gains());
  EXPECT_EQ(model.apply(r, d).values, manual.values);
}

TEST(NoiseModel, GainsDependOnSeed) {
  EXPECT_NE(NoiseModel(NoiseConfig{0.0, 0.2, 0, 1}, 4).site_gains(),
            NoiseModel(NoiseConfig{0.0, 0.2, 0, 2}, 4).site_gains());
  EXPECT_THROW(NoiseModel(NoiseConfig{-1.0, 0.0, 0, 1}, 4), ConfigError);
}

}  // namespace
}  // namespace qrst
