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
#include <random>

#include "qrst/linalg.hpp"
#include "qrst/rng.hpp"

namespace qrst::testing {

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline ComplexMatrix random_hermitian(Eigen::Index d, Rng& rng) {
  const ComplexMatrix g = random_complex(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

inline ComplexMatrix random_psd(Eigen::Index d, Rng& rng) {
  const ComplexMatrix g = random_complex(d, d, rng);
  return g * g.adjoint();
}

/// Independent of the library's sampler: a random pure-state mixture.
inline ComplexMatrix random_mixture(Eigen::Index d, int components, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  double total = 0.0;
  for (int c = 0; c < components; ++c) {
    ComplexMatrix v = random_complex(d, 1, rng);
    v /= v.norm();
    const double w = u(rng) + 1e-3;
    rho += w * v * v.adjoint();
    total += w;
  }
  return rho / total;
}

inline double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace qrst::testing
