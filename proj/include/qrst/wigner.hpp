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

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "qrst/linalg.hpp"

namespace qrst {

/// Uniform x and p sample points.
struct PhaseGrid {
  std::vector<double> x;
  std::vector<double> p;

  double dx() const { return x.size() > 1 ? x[1] - x[0] : 1.0; }
  double dp() const { return p.size() > 1 ? p[1] - p[0] : 1.0; }
  std::size_t points() const { return x.size() * p.size(); }

  static PhaseGrid uniform(double lo, double hi, int n) {
    PhaseGrid g;
    for (int i = 0; i < n; ++i) {
      const double v = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
      g.x.push_back(v);
      g.p.push_back(v);
    }
    return g;
  }

  bool operator==(const PhaseGrid&) const = default;
};

/// 41 x 41 points over [-5, 5]^2 (spacing 0.25).
inline PhaseGrid default_grid() { return PhaseGrid::uniform(-5.0, 5.0, 41); }

/// W(x_i, p_j) stored as w(i, j).
struct WignerGrid {
  PhaseGrid grid;
  RealMatrix w;

  /// Row-major flattening (x outer, p inner), used as a regression target.
  RealVector flatten() const {
    RealVector out(w.size());
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) out(i * w.cols() + j) = w(i, j);
    return out;
  }

  static WignerGrid unflatten(const PhaseGrid& grid, const RealVector& v) {
    WignerGrid g{grid, RealMatrix(static_cast<Eigen::Index>(grid.x.size()), static_cast<Eigen::Index>(grid.p.size()))};
    if (v.size() != g.w.size()) throw GridMismatch("flattened Wigner length " + std::to_string(v.size()));
    for (Eigen::Index i = 0; i < g.w.rows(); ++i)
      for (Eigen::Index j = 0; j < g.w.cols(); ++j) g.w(i, j) = v(i * g.w.cols() + j);
    return g;
  }

  double mass() const { return w.sum() * grid.dx() * grid.dp(); }
};

namespace detail {

/// (1/pi) Tr[rho D(alpha) Pi D(alpha)^dag] with alpha = (x + i p)/sqrt(2).
/// Matrix elements of the displaced parity for m >= n:
///   (-1)^n sqrt(n!/m!) (2 alpha)^(m-n) exp(-2|alpha|^2) L_n^(m-n)(4|alpha|^2)
inline double wigner_point(const ComplexMatrix& rho, double x, double p) {
  const Eigen::Index dim = rho.rows();
  const cplx alpha(x / std::sqrt(2.0), p / std::sqrt(2.0));
  const double a2 = std::norm(alpha);
  const double z = 4.0 * a2;
  const double envelope = std::exp(-2.0 * a2);
  double total = 0.0;
  cplx two_alpha_pow(1.0);  // (2 alpha)^k
  double inv_sqrt_kfact = 1.0;  // 1/sqrt(k!)
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (k > 0) {
      two_alpha_pow *= 2.0 * alpha;
      inv_sqrt_kfact /= std::sqrt(static_cast<double>(k));
    }
    double lag_prev = 0.0, lag = 1.0;  // L_{n-1}^(k), L_n^(k)
    double ratio = inv_sqrt_kfact;     // sqrt(n!/(n+k)!)
    cplx acc{};
    for (Eigen::Index n = 0; n + k < dim; ++n) {
      if (n == 1) {
        lag_prev = lag;
        lag = 1.0 + k - z;
      } else if (n > 1) {
        const double next = ((2.0 * (n - 1) + 1.0 + k - z) * lag - (n - 1.0 + k) * lag_prev) / n;
        lag_prev = lag;
        lag = next;
      }
      if (n > 0) ratio *= std::sqrt(static_cast<double>(n) / static_cast<double>(n + k));
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      acc += rho(n, n + k) * (sign * ratio * lag);
    }
    const cplx contribution = acc * two_alpha_pow;
    total += (k == 0) ? contribution.real() : 2.0 * contribution.real();
  }
  return envelope * total / std::numbers::pi;
}

}  // namespace detail

/// Wigner function of a Fock-basis density matrix (hbar = 1, vacuum
/// quadrature variance 1/2). Throws CutoffInsufficient when the grid does
/// not contain the state (quadrature mass outside [0.98, 1.02]).
inline WignerGrid wigner(const ComplexMatrix& rho, const PhaseGrid& grid = default_grid()) {
  if (rho.rows() != rho.cols()) throw NonSquare("Wigner input must be square");
  WignerGrid out{grid, RealMatrix(static_cast<Eigen::Index>(grid.x.size()), static_cast<Eigen::Index>(grid.p.size()))};
  for (std::size_t i = 0; i < grid.x.size(); ++i)
    for (std::size_t j = 0; j < grid.p.size(); ++j)
      out.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = detail::wigner_point(rho, grid.x[i], grid.p[j]);
  const double mass = out.mass() / rho.trace().real();
  if (mass < 0.98 || mass > 1.02)
    throw CutoffInsufficient("grid holds " + std::to_string(mass) + " of the quasi-probability mass");
  return out;
}

struct GridMoments {
  double mean_x = 0.0, mean_p = 0.0, var_x = 0.0, var_p = 0.0;
};

inline GridMoments grid_moments(const WignerGrid& g) {
  double mass = 0.0, sx = 0.0, sp = 0.0, sxx = 0.0, spp = 0.0;
  for (std::size_t i = 0; i < g.grid.x.size(); ++i)
    for (std::size_t j = 0; j < g.grid.p.size(); ++j) {
      const double w = g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double x = g.grid.x[i], p = g.grid.p[j];
      mass += w;
      sx += w * x;
      sp += w * p;
      sxx += w * x * x;
      spp += w * p * p;
    }
  GridMoments m;
  m.mean_x = sx / mass;
  m.mean_p = sp / mass;
  m.var_x = sxx / mass - m.mean_x * m.mean_x;
  m.var_p = spp / mass - m.mean_p * m.mean_p;
  return m;
}

/// `x,p,w` rows, x outer.
inline void write_wigner_csv(std::ostream& os, const WignerGrid& g) {
  os << "x,p,w\n";
  os.precision(17);
  for (std::size_t i = 0; i < g.grid.x.size(); ++i)
    for (std::size_t j = 0; j < g.grid.p.size(); ++j)
      os << g.grid.x[i] << ',' << g.grid.p[j] << ',' << g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
         << '\n';
}

}  // namespace qrst
