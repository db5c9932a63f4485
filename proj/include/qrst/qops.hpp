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
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "qrst/linalg.hpp"

namespace qrst {

/// Ordered tensor-product structure: reservoir sites first, then input modes.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    for (int d : dims_)
      if (d < 2) throw DimTooSmall("local dimension " + std::to_string(d) + " < 2");
  }

  /// `sites` two-level reservoir factors followed by `inputs`.
  static SpaceLayout reservoir_plus(int sites, const std::vector<int>& inputs) {
    std::vector<int> dims(static_cast<std::size_t>(sites), 2);
    dims.insert(dims.end(), inputs.begin(), inputs.end());
    return SpaceLayout(std::move(dims));
  }

  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  int dim(std::size_t which) const { return dims_.at(which); }

  Eigen::Index total_dim() const {
    return std::accumulate(dims_.begin(), dims_.end(), Eigen::Index{1}, std::multiplies<>());
  }

  /// Product of the local dimensions after `which`.
  Eigen::Index inner_stride(std::size_t which) const {
    Eigen::Index s = 1;
    for (std::size_t i = which + 1; i < dims_.size(); ++i) s *= dims_[i];
    return s;
  }

 private:
  std::vector<int> dims_;
};

/// Truncated bosonic lowering operator, a[n-1, n] = sqrt(n).
inline ComplexMatrix local_lowering(int dim) {
  if (dim < 2) throw DimTooSmall("local_lowering dim " + std::to_string(dim));
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// I (x) ... (x) op (x) ... (x) I, built directly from the nonzeros of op.
inline SparseOperator embed_sparse(const SpaceLayout& layout, std::size_t which, const ComplexMatrix& op) {
  if (which >= layout.size())
    throw IndexOutOfRange("subsystem " + std::to_string(which) + " of " + std::to_string(layout.size()));
  const int local = layout.dim(which);
  if (op.rows() != local || op.cols() != local)
    throw DimMismatch("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                      ", subsystem dim " + std::to_string(local));
  const Eigen::Index total = layout.total_dim();
  const Eigen::Index inner = layout.inner_stride(which);
  const Eigen::Index outer = total / (inner * local);

  std::vector<Eigen::Triplet<cplx>> triplets;
  for (Eigen::Index r = 0; r < local; ++r)
    for (Eigen::Index c = 0; c < local; ++c) {
      const cplx v = op(r, c);
      if (v == cplx{}) continue;
      for (Eigen::Index o = 0; o < outer; ++o)
        for (Eigen::Index i = 0; i < inner; ++i)
          triplets.emplace_back((o * local + r) * inner + i, (o * local + c) * inner + i, v);
    }
  SparseOperator out(total, total);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

inline ComplexMatrix embed(const SpaceLayout& layout, std::size_t which, const ComplexMatrix& op) {
  return ComplexMatrix(embed_sparse(layout, which, op));
}

/// Generalized Gell-Mann basis of su(d): for every pair j < k the symmetric
/// then antisymmetric generator, followed by the d - 1 diagonal ones.
/// Normalized to Tr(z_a z_b) = 2 delta_ab.
inline std::vector<ComplexMatrix> su_generators(int d) {
  if (d < 2) throw DimTooSmall("su_generators d " + std::to_string(d));
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix sym = ComplexMatrix::Zero(d, d);
      sym(j, k) = sym(k, j) = 1.0;
      out.push_back(std::move(sym));
      ComplexMatrix anti = ComplexMatrix::Zero(d, d);
      anti(j, k) = cplx(0.0, -1.0);
      anti(k, j) = cplx(0.0, 1.0);
      out.push_back(std::move(anti));
    }
  for (int l = 1; l < d; ++l) {
    ComplexMatrix diag = ComplexMatrix::Zero(d, d);
    const double norm = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int i = 0; i < l; ++i) diag(i, i) = norm;
    diag(l, l) = -l * norm;
    out.push_back(std::move(diag));
  }
  return out;
}

inline std::vector<SparseOperator> occupation_operators_sparse(const SpaceLayout& layout, int reservoir_count) {
  if (reservoir_count < 0 || static_cast<std::size_t>(reservoir_count) > layout.size())
    throw IndexOutOfRange("reservoir_count " + std::to_string(reservoir_count));
  std::vector<SparseOperator> out;
  for (int j = 0; j < reservoir_count; ++j) {
    const ComplexMatrix a = local_lowering(layout.dim(static_cast<std::size_t>(j)));
    out.push_back(embed_sparse(layout, static_cast<std::size_t>(j), a.adjoint() * a));
  }
  return out;
}

/// Embedded c_j^dagger c_j for each reservoir site j.
inline std::vector<ComplexMatrix> occupation_operators(const SpaceLayout& layout, int reservoir_count) {
  std::vector<ComplexMatrix> out;
  for (const auto& op : occupation_operators_sparse(layout, reservoir_count)) out.emplace_back(op);
  return out;
}

}  // namespace qrst
