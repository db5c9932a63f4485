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

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qrst/linalg.hpp"
#include "qrst/qops.hpp"
#include "qrst/rng.hpp"

namespace qrst {

using Edge = std::pair<int, int>;

/// Random reservoir: 2D lattice of two-level sites with mixed-sign hopping
/// normalized to a target spectral radius, uniform pump, and cascaded input
/// weights. Rates and energies are in units of the site decay rate.
struct ReservoirSpec {
  int n_sites = 1;
  std::vector<Edge> lattice_edges;
  std::vector<double> couplings;  // one per edge
  double pump = 0.3;
  double decay = 1.0;
  double j_tilde = 1.0;
  RealMatrix input_weights;  // sites x input modes, entries in [0, omega]
  double omega = 1.0;
  RealVector eta;  // column sums of squared input weights
  std::uint64_t seed = 0;

  int n_inputs() const { return static_cast<int>(input_weights.cols()); }
};

/// Row-major fill of a ceil(sqrt(n))-column grid; open-boundary
/// nearest-neighbour edges, each listed once as (lower, higher).
inline std::vector<Edge> build_lattice(int n) {
  std::vector<Edge> edges;
  if (n < 1) return edges;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
  for (int s = 0; s < n; ++s) {
    const int c = s % cols;
    if (c + 1 < cols && s + 1 < n) edges.emplace_back(s, s + 1);
    if (s + cols < n) edges.emplace_back(s, s + cols);
  }
  return edges;
}

/// Symmetric N x N single-particle hopping matrix.
inline RealMatrix coupling_matrix(int n_sites, const std::vector<Edge>& edges, const std::vector<double>& couplings) {
  RealMatrix a = RealMatrix::Zero(n_sites, n_sites);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    a(edges[e].first, edges[e].second) += couplings[e];
    a(edges[e].second, edges[e].first) += couplings[e];
  }
  return a;
}

inline RealMatrix coupling_matrix(const ReservoirSpec& spec) {
  return coupling_matrix(spec.n_sites, spec.lattice_edges, spec.couplings);
}

/// Rescale raw edge couplings so the hopping matrix has spectral radius
/// j_tilde. Single sites and all-zero draws are returned unchanged.
inline std::vector<double> normalize_couplings(int n_sites, const std::vector<Edge>& edges,
                                               std::vector<double> raw, double j_tilde) {
  if (n_sites < 2) return raw;
  const double radius = spectral_radius(coupling_matrix(n_sites, edges, raw));
  if (radius == 0.0) return raw;
  for (double& j : raw) j *= j_tilde / radius;
  return raw;
}

inline void refresh_eta(ReservoirSpec& spec) { spec.eta = spec.input_weights.colwise().squaredNorm().transpose(); }

struct ReservoirParams {
  int n_sites = 1;
  double j_tilde = 1.0;
  double omega = 1.0;
  double pump = 0.3;
  int n_inputs = 1;
};

inline ReservoirSpec sample_reservoir(const ReservoirParams& p, std::uint64_t seed) {
  if (p.n_sites < 1) throw DimTooSmall("reservoir needs at least one site");
  if (p.j_tilde < 0.0 || p.omega < 0.0) throw DimMismatch("j_tilde and omega must be non-negative");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ReservoirSpec spec;
  spec.n_sites = p.n_sites;
  spec.lattice_edges = build_lattice(p.n_sites);
  std::vector<double> raw(spec.lattice_edges.size());
  for (double& j : raw) j = 2.0 * unit(rng) - 1.0;
  spec.couplings = normalize_couplings(p.n_sites, spec.lattice_edges, std::move(raw), p.j_tilde);
  spec.pump = p.pump;
  spec.decay = 1.0;
  spec.j_tilde = p.j_tilde;
  spec.omega = p.omega;
  spec.input_weights.resize(p.n_sites, p.n_inputs);
  for (int j = 0; j < p.n_sites; ++j)
    for (int k = 0; k < p.n_inputs; ++k) spec.input_weights(j, k) = p.omega * unit(rng);
  refresh_eta(spec);
  spec.seed = seed;
  return spec;
}

inline void check_reservoir_layout(const ReservoirSpec& spec, const SpaceLayout& layout) {
  if (layout.size() < static_cast<std::size_t>(spec.n_sites))
    throw DimMismatch("layout has " + std::to_string(layout.size()) + " factors for " +
                      std::to_string(spec.n_sites) + " sites");
  for (int j = 0; j < spec.n_sites; ++j)
    if (layout.dim(static_cast<std::size_t>(j)) != 2)
      throw DimMismatch("reservoir site " + std::to_string(j) + " is not two-level");
}

/// sum_<ij> J_ij (c_i^dag c_j + h.c.) + P sum_i (c_i^dag + c_i) on the joint space.
inline SparseOperator hamiltonian_sparse(const ReservoirSpec& spec, const SpaceLayout& layout) {
  check_reservoir_layout(spec, layout);
  const ComplexMatrix lower = local_lowering(2);
  std::vector<SparseOperator> c;
  for (int j = 0; j < spec.n_sites; ++j) c.push_back(embed_sparse(layout, static_cast<std::size_t>(j), lower));
  const Eigen::Index dim = layout.total_dim();
  SparseOperator h(dim, dim);
  for (std::size_t e = 0; e < spec.lattice_edges.size(); ++e) {
    const auto [i, j] = spec.lattice_edges[e];
    const SparseOperator hop = SparseOperator(c[static_cast<std::size_t>(i)].adjoint()) * c[static_cast<std::size_t>(j)];
    h += spec.couplings[e] * (hop + SparseOperator(hop.adjoint()));
  }
  for (const auto& cj : c) h += spec.pump * (cj + SparseOperator(cj.adjoint()));
  h.prune(cplx{});
  return h;
}

inline ComplexMatrix hamiltonian(const ReservoirSpec& spec, const SpaceLayout& layout) {
  return ComplexMatrix(hamiltonian_sparse(spec, layout));
}

namespace detail {

inline void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
  out.push_back(',');
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Stable 64-bit hash over every field (shortest round-trip decimal form of
/// each double), rendered as 16 hex digits.
inline std::string fingerprint(const ReservoirSpec& spec) {
  std::string canon = "qrst-reservoir-v1|n=" + std::to_string(spec.n_sites) + "|edges=";
  for (const auto& [i, j] : spec.lattice_edges) canon += std::to_string(i) + "-" + std::to_string(j) + ",";
  canon += "|J=";
  for (double j : spec.couplings) detail::append_number(canon, j);
  canon += "|scalars=";
  for (double v : {spec.pump, spec.decay, spec.j_tilde, spec.omega}) detail::append_number(canon, v);
  canon += "|win=" + std::to_string(spec.input_weights.rows()) + "x" + std::to_string(spec.input_weights.cols()) + ":";
  for (Eigen::Index j = 0; j < spec.input_weights.rows(); ++j)
    for (Eigen::Index k = 0; k < spec.input_weights.cols(); ++k) detail::append_number(canon, spec.input_weights(j, k));
  canon += "|eta=";
  for (Eigen::Index k = 0; k < spec.eta.size(); ++k) detail::append_number(canon, spec.eta(k));
  canon += "|seed=" + std::to_string(spec.seed);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(detail::fnv1a(canon)));
  return hex;
}

}  // namespace qrst
