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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qrst/linalg.hpp"
#include "qrst/qops.hpp"
#include "qrst/reservoir.hpp"

namespace qrst {

enum class CouplingMode { cascaded, hopping };

/// How several cascaded input modes feed the reservoir. `literal` keeps one
/// independent decay term eta_k L(a_k)/2 per input mode; `collective` lets
/// site j absorb the superposed field B_j = sum_k M_jk a_k, which adds the
/// k != k' cross terms and keeps the generator completely positive. The two
/// coincide for a single input mode.
enum class CascadeForm { collective, literal };

inline const char* to_string(CouplingMode m) { return m == CouplingMode::cascaded ? "cascaded" : "hopping"; }
inline const char* to_string(CascadeForm f) { return f == CascadeForm::collective ? "collective" : "literal"; }

/// Times in units of hbar/gamma.
struct ProtocolParams {
  double t1 = 7.6;
  double tau = 1.5;
  int multiplexity = 1;
  double dt = 0.005;
  CouplingMode coupling_mode = CouplingMode::cascaded;
  CascadeForm cascade_form = CascadeForm::collective;

  void validate() const {
    if (!(t1 > 0.0) || !(tau > 0.0) || !(dt > 0.0)) throw ConfigError("t1, tau and dt must be positive");
    if (multiplexity < 1) throw ConfigError("multiplexity must be >= 1");
    if (dt > tau / (10.0 * multiplexity) * (1.0 + 1e-12))
      throw ConfigError("dt " + std::to_string(dt) + " exceeds tau/(10 M) = " + std::to_string(tau / (10.0 * multiplexity)));
  }

  /// Readout times t1 + j tau / M, j = 1..M.
  std::vector<double> sample_times() const {
    std::vector<double> t;
    for (int j = 1; j <= multiplexity; ++j) t.push_back(t1 + j * tau / multiplexity);
    return t;
  }
};

/// Mean occupations, index m * n_sites + j for site j at sample m.
struct ReadoutVector {
  RealVector values;
  std::vector<double> times;
  int n_sites = 0;
  std::string reservoir_fingerprint;

  Eigen::Index size() const { return values.size(); }
};

/// Liouvillian of the reservoir plus (optionally) coupled input modes, in
/// the form
///   d rho/dt = K rho + rho K^dag + sum_t w_t (A_t rho B_t + h.c.)
/// with sparse K, A_t, B_t. The adjoint (Heisenberg picture) generator uses
/// the same operators.
class Generator {
 public:
  Generator(const ReservoirSpec& spec, const SpaceLayout& layout, bool input_active, CouplingMode mode,
            CascadeForm form = CascadeForm::collective) {
    check_reservoir_layout(spec, layout);
    const int n = spec.n_sites;
    const int inputs = static_cast<int>(layout.size()) - n;
    if (input_active && inputs != spec.n_inputs())
      throw DimMismatch("layout has " + std::to_string(inputs) + " input modes, reservoir expects " +
                        std::to_string(spec.n_inputs()));
    dim_ = layout.total_dim();
    const double gamma = spec.decay;
    const ComplexMatrix sigma_minus = local_lowering(2);

    std::vector<SparseOperator> c, a;
    for (int j = 0; j < n; ++j) c.push_back(embed_sparse(layout, static_cast<std::size_t>(j), sigma_minus));
    for (int k = 0; k < inputs; ++k) {
      const auto which = static_cast<std::size_t>(n + k);
      a.push_back(embed_sparse(layout, which, local_lowering(layout.dim(which))));
    }

    SparseOperator h = hamiltonian_sparse(spec, layout);
    SparseOperator k_op(dim_, dim_);

    std::vector<SparseOperator> fields;  // B_j = sum_k M_jk a_k
    if (input_active) {
      for (int j = 0; j < n; ++j) {
        SparseOperator b(dim_, dim_);
        for (int k = 0; k < inputs; ++k) b += spec.input_weights(j, k) * a[static_cast<std::size_t>(k)];
        fields.push_back(std::move(b));
      }
    }

    if (input_active && mode == CouplingMode::hopping) {
      for (int j = 0; j < n; ++j) {
        const SparseOperator cj_dag = c[static_cast<std::size_t>(j)].adjoint();
        const SparseOperator x = cj_dag * fields[static_cast<std::size_t>(j)];
        h += x + SparseOperator(x.adjoint());
      }
    }
    k_op = cplx(0.0, -1.0) * h;

    for (int j = 0; j < n; ++j) {
      const auto& cj = c[static_cast<std::size_t>(j)];
      const SparseOperator cj_dag = cj.adjoint();
      k_op -= (0.5 * gamma) * SparseOperator(cj_dag * cj);
    }

    if (input_active && mode == CouplingMode::cascaded) {
      for (int j = 0; j < n; ++j) {
        const auto& bj = fields[static_cast<std::size_t>(j)];
        const SparseOperator cj_dag = c[static_cast<std::size_t>(j)].adjoint();
        k_op -= SparseOperator(cj_dag * bj);
      }
      if (form == CascadeForm::collective) {
        for (int j = 0; j < n; ++j) {
          const auto& bj = fields[static_cast<std::size_t>(j)];
          k_op -= (0.5 / gamma) * SparseOperator(SparseOperator(bj.adjoint()) * bj);
          const SparseOperator jump = std::sqrt(gamma) * c[static_cast<std::size_t>(j)] + (1.0 / std::sqrt(gamma)) * bj;
          add_self_term(jump);
        }
      } else {
        for (int k = 0; k < inputs; ++k) {
          const auto& ak = a[static_cast<std::size_t>(k)];
          k_op -= (0.5 * spec.eta(k) / gamma) * SparseOperator(SparseOperator(ak.adjoint()) * ak);
          if (spec.eta(k) > 0.0) add_self_term(std::sqrt(spec.eta(k) / gamma) * ak);
        }
        for (int j = 0; j < n; ++j) {
          add_self_term(std::sqrt(gamma) * c[static_cast<std::size_t>(j)]);
          add_pair_term(fields[static_cast<std::size_t>(j)], c[static_cast<std::size_t>(j)]);
        }
      }
    } else {
      for (int j = 0; j < n; ++j) add_self_term(std::sqrt(gamma) * c[static_cast<std::size_t>(j)]);
    }

    k_op.prune(cplx{});
    k_ = std::move(k_op);
    k_adj_ = k_.adjoint();
  }

  Eigen::Index dim() const { return dim_; }

  /// Scratch matrices for the allocation-free entry points.
  struct Workspace {
    ComplexMatrix y, yt;
  };

  /// d rho/dt for Hermitian rho. The result has the form S + S^dag, and S
  /// may collect either a term or its adjoint, so every sparse factor is
  /// applied from the right of a column-major dense matrix.
  void apply_hermitian(const ComplexMatrix& rho, ComplexMatrix& out, Workspace& ws) const {
    out.noalias() = rho * k_adj_;  // (K rho)^dag
    for (const auto& t : terms_) {
      ws.y.noalias() = rho * t.right_w;  // w rho R
      ws.yt = ws.y.adjoint();
      out.noalias() += ws.yt * t.left_adj;  // (w A rho R)^dag
    }
    ws.yt = out.adjoint();
    out += ws.yt;
  }

  ComplexMatrix apply_hermitian(const ComplexMatrix& rho) const {
    ComplexMatrix out(dim_, dim_);
    Workspace ws;
    apply_hermitian(rho, out, ws);
    return out;
  }

  /// d rho/dt for arbitrary rho.
  ComplexMatrix apply(const ComplexMatrix& rho) const {
    ComplexMatrix out = k_ * rho + right_multiply(rho, k_);
    for (const auto& t : terms_) {
      out.noalias() += t.weight * right_multiply(t.left * rho, t.right_adj);
      out.noalias() += t.weight * right_multiply(t.right_adj * rho, t.left);
    }
    return out;
  }

  /// d O/dt of a Hermitian observable in the Heisenberg picture, so that
  /// Tr(O apply(rho)) = Tr(apply_adjoint_hermitian(O) rho).
  void apply_adjoint_hermitian(const ComplexMatrix& obs, ComplexMatrix& out, Workspace& ws) const {
    out.noalias() = obs * k_;  // (K^dag O)^dag
    for (const auto& t : terms_) {
      ws.y.noalias() = obs * t.right_adj_w;  // w O R^dag
      ws.yt = ws.y.adjoint();
      out.noalias() += ws.yt * t.left;  // w R O A
    }
    ws.yt = out.adjoint();
    out += ws.yt;
  }

  ComplexMatrix apply_adjoint_hermitian(const ComplexMatrix& obs) const {
    ComplexMatrix out(dim_, dim_);
    Workspace ws;
    apply_adjoint_hermitian(obs, out, ws);
    return out;
  }

 private:
  // Contributes weight * (left rho right + h.c.); right = B^dag of the pair.
  struct Term {
    SparseOperator left, right, left_adj, right_adj;
    double weight;
    SparseOperator right_w, right_adj_w;  // scaled by weight
  };

  /// dense * sparse, evaluated as (sparse^dag * dense^dag)^dag with the
  /// adjoint operator supplied pre-computed.
  static ComplexMatrix right_multiply(const ComplexMatrix& dense, const SparseOperator& sparse_adj) {
    return (sparse_adj * dense.adjoint()).adjoint();
  }

  void push_term(SparseOperator left, SparseOperator right, double weight) {
    Term t;
    t.left_adj = left.adjoint();
    t.right_adj = right.adjoint();
    t.right_w = weight * right;
    t.right_adj_w = weight * t.right_adj;
    t.left = std::move(left);
    t.right = std::move(right);
    t.weight = weight;
    terms_.push_back(std::move(t));
  }

  void add_self_term(const SparseOperator& l) { push_term(l, l.adjoint(), 0.5); }
  /// a rho b^dag + b rho a^dag
  void add_pair_term(const SparseOperator& a, const SparseOperator& b) { push_term(a, b.adjoint(), 1.0); }

  Eigen::Index dim_ = 0;
  SparseOperator k_, k_adj_;
  std::vector<Term> terms_;
};

/// Spec-level entry point: builds the generator and evaluates d rho/dt.
inline ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ReservoirSpec& spec, const SpaceLayout& layout,
                                  bool input_active, CouplingMode mode,
                                  CascadeForm form = CascadeForm::collective) {
  if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
    throw DimMismatch("rho is " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()) + ", layout dim " +
                      std::to_string(layout.total_dim()));
  return Generator(spec, layout, input_active, mode, form).apply(rho);
}

struct TrajectoryStats {
  long steps = 0;
  double max_trace_drift = 0.0;       // |Tr rho - 1| after a step, before renormalization
  double max_hermiticity_defect = 0.0;  // before re-Hermitization
};

namespace detail {

inline int step_count(double duration, double dt) {
  return std::max(1, static_cast<int>(std::ceil(duration / dt - 1e-9)));
}

struct Rk4Workspace {
  ComplexMatrix k, acc, stage;
  Generator::Workspace gen;
};

/// One classical RK4 step; rhs(x, out, gen_ws) writes dx/dt into out.
template <class Rhs>
void rk4_step(ComplexMatrix& x, double h, const Rhs& rhs, Rk4Workspace& ws) {
  rhs(x, ws.k, ws.gen);
  ws.acc = ws.k;
  ws.stage = x + (0.5 * h) * ws.k;
  rhs(ws.stage, ws.k, ws.gen);
  ws.acc += 2.0 * ws.k;
  ws.stage = x + (0.5 * h) * ws.k;
  rhs(ws.stage, ws.k, ws.gen);
  ws.acc += 2.0 * ws.k;
  ws.stage = x + h * ws.k;
  rhs(ws.stage, ws.k, ws.gen);
  ws.acc += ws.k;
  x += (h / 6.0) * ws.acc;
}

}  // namespace detail

inline constexpr double kMaxStepTraceDrift = 1e-6;

/// Fixed-step RK4 over [t_start, t_end]; the step is dt shrunk so that an
/// integer number of steps spans the interval. After each step rho is
/// re-Hermitized and trace-renormalized; the corrections are recorded.
inline ComplexMatrix evolve(ComplexMatrix rho, const Generator& gen, double t_start, double t_end, double dt,
                            TrajectoryStats* stats = nullptr) {
  const int steps = detail::step_count(t_end - t_start, dt);
  const double h = (t_end - t_start) / steps;
  auto rhs = [&gen](const ComplexMatrix& x, ComplexMatrix& out, Generator::Workspace& ws) {
    gen.apply_hermitian(x, out, ws);
  };
  detail::Rk4Workspace ws;
  for (int s = 0; s < steps; ++s) {
    detail::rk4_step(rho, h, rhs, ws);
    const cplx tr = rho.trace();
    const double drift = std::abs(tr - cplx(1.0));
    if (drift > kMaxStepTraceDrift)
      throw StepTooLarge("trace drift " + std::to_string(drift) + " in one step of size " + std::to_string(h));
    if (stats) {
      stats->steps += 1;
      stats->max_trace_drift = std::max(stats->max_trace_drift, drift);
      stats->max_hermiticity_defect = std::max(stats->max_hermiticity_defect, hermiticity_defect(rho));
    }
    ws.stage = rho.adjoint();
    rho += ws.stage;
    rho *= 0.5 / tr.real();
  }
  return rho;
}

inline ComplexMatrix evolve(const ComplexMatrix& rho0, const ReservoirSpec& spec, const SpaceLayout& layout,
                            double t_start, double t_end, double dt, bool input_active, CouplingMode mode,
                            CascadeForm form = CascadeForm::collective) {
  return evolve(rho0, Generator(spec, layout, input_active, mode, form), t_start, t_end, dt);
}

struct SteadyState {
  ComplexMatrix rho;
  double residual = 0.0;  // max |d rho/dt| at t1
};

/// Reservoir alone from the vacuum, pump on, input off, up to t1.
inline SteadyState relax_to_steady(const ReservoirSpec& spec, const ProtocolParams& params) {
  const SpaceLayout layout = SpaceLayout::reservoir_plus(spec.n_sites, {});
  const Generator gen(spec, layout, false, params.coupling_mode, params.cascade_form);
  ComplexMatrix rho = ComplexMatrix::Zero(layout.total_dim(), layout.total_dim());
  rho(0, 0) = 1.0;
  SteadyState out;
  out.rho = evolve(std::move(rho), gen, 0.0, params.t1, params.dt);
  out.residual = gen.apply_hermitian(out.rho).cwiseAbs().maxCoeff();
  return out;
}

/// Readouts as expectation values of fixed input-space operators:
/// n_{m,j} = Re Tr(rho_in E_{m,j}).
struct ReadoutPovm {
  std::vector<ComplexMatrix> elements;
  std::vector<double> times;
  int n_sites = 0;
  std::vector<int> input_dims;
  std::string reservoir_fingerprint;

  Eigen::Index input_dim() const { return elements.empty() ? 0 : elements.front().rows(); }

  /// A single truncated bosonic input may be supplied at a lower cutoff;
  /// its Fock populations can only flow downward, so zero-padding is exact.
  ReadoutVector readout(const ComplexMatrix& rho_in) const {
    const Eigen::Index d = rho_in.rows();
    if (d != input_dim() && !(input_dims.size() == 1 && d >= 2 && d < input_dim()))
      throw DimMismatch("input state dim " + std::to_string(d) + ", POVM dim " + std::to_string(input_dim()));
    ReadoutVector out;
    out.values.resize(static_cast<Eigen::Index>(elements.size()));
    for (std::size_t i = 0; i < elements.size(); ++i)
      out.values(static_cast<Eigen::Index>(i)) =
          rho_in.cwiseProduct(elements[i].topLeftCorner(d, d).transpose()).sum().real();
    out.times = times;
    out.n_sites = n_sites;
    out.reservoir_fingerprint = reservoir_fingerprint;
    return out;
  }
};

struct ProtocolDiagnostics {
  TrajectoryStats stats;
  std::vector<double> min_eigenvalues;      // of the joint rho at each sample time
  std::vector<double> hermiticity_defects;  // of the joint rho at each sample time
  std::vector<double> trace_errors;
};

/// The four-step protocol for one reservoir: steady state at t1, coupling
/// switched on, occupations sampled at t1 + j tau / M. Immutable after
/// construction and safe to share across threads.
class ProtocolRunner {
 public:
  ProtocolRunner(ReservoirSpec spec, ProtocolParams params, std::vector<int> input_dims)
      : spec_(std::move(spec)),
        params_(params),
        input_dims_(std::move(input_dims)),
        layout_(SpaceLayout::reservoir_plus(spec_.n_sites, input_dims_)),
        fingerprint_(fingerprint(spec_)) {
    params_.validate();
    if (static_cast<int>(input_dims_.size()) != spec_.n_inputs())
      throw DimMismatch("reservoir has " + std::to_string(spec_.n_inputs()) + " input weights columns, got " +
                        std::to_string(input_dims_.size()) + " input modes");
    steady_ = relax_to_steady(spec_, params_);
    generator_ = std::make_shared<const Generator>(spec_, layout_, true, params_.coupling_mode, params_.cascade_form);
  }

  const ReservoirSpec& spec() const { return spec_; }
  const ProtocolParams& params() const { return params_; }
  const SpaceLayout& layout() const { return layout_; }
  const std::vector<int>& input_dims() const { return input_dims_; }
  const SteadyState& steady_state() const { return steady_; }
  const Generator& generator() const { return *generator_; }
  const std::string& reservoir_fingerprint() const { return fingerprint_; }

  Eigen::Index input_dim() const {
    Eigen::Index d = 1;
    for (int k : input_dims_) d *= k;
    return d;
  }

  /// Forward simulation of the joint density matrix.
  ReadoutVector run(const ComplexMatrix& rho_in, ProtocolDiagnostics* diag = nullptr) const {
    if (rho_in.rows() != input_dim() || rho_in.cols() != input_dim())
      throw DimMismatch("input state dim " + std::to_string(rho_in.rows()) + ", expected " + std::to_string(input_dim()));
    const auto occupations = occupation_operators_sparse(layout_, spec_.n_sites);
    ComplexMatrix rho = kron(steady_.rho, rho_in);
    const int n = spec_.n_sites;
    const int m_count = params_.multiplexity;
    ReadoutVector out;
    out.values.resize(n * m_count);
    out.times = params_.sample_times();
    out.n_sites = n;
    out.reservoir_fingerprint = fingerprint_;
    const double segment = params_.tau / m_count;
    for (int m = 0; m < m_count; ++m) {
      const double t0 = params_.t1 + m * segment;
      rho = evolve(std::move(rho), *generator_, t0, t0 + segment, params_.dt, diag ? &diag->stats : nullptr);
      for (int j = 0; j < n; ++j)
        out.values(m * n + j) = (occupations[static_cast<std::size_t>(j)] * rho).trace().real();
      if (diag) {
        diag->min_eigenvalues.push_back(hermitian_eig(rho, 1e-8).values(0));
        diag->hermiticity_defects.push_back(hermiticity_defect(rho));
        diag->trace_errors.push_back(std::abs(rho.trace() - cplx(1.0)));
      }
    }
    return out;
  }

  /// Heisenberg-picture route: each occupation operator is propagated
  /// backwards over tau once, and its partial expectation in the steady
  /// reservoir state gives the POVM element for every sample time.
  ReadoutPovm readout_povm() const {
    const auto occupations = occupation_operators_sparse(layout_, spec_.n_sites);
    const int n = spec_.n_sites;
    const int m_count = params_.multiplexity;
    const Eigen::Index din = input_dim();
    const Eigen::Index dres = steady_.rho.rows();
    ReadoutPovm povm;
    povm.elements.resize(static_cast<std::size_t>(n * m_count));
    povm.times = params_.sample_times();
    povm.n_sites = n;
    povm.input_dims = input_dims_;
    povm.reservoir_fingerprint = fingerprint_;

    const double segment = params_.tau / m_count;
    const int steps = detail::step_count(segment, params_.dt);
    const double h = segment / steps;
    auto rhs = [this](const ComplexMatrix& x, ComplexMatrix& out, Generator::Workspace& ws) {
      generator_->apply_adjoint_hermitian(x, out, ws);
    };
    detail::Rk4Workspace ws;
    for (int j = 0; j < n; ++j) {
      ComplexMatrix obs(occupations[static_cast<std::size_t>(j)]);
      for (int m = 0; m < m_count; ++m) {
        for (int s = 0; s < steps; ++s) {
          detail::rk4_step(obs, h, rhs, ws);
          ws.stage = obs.adjoint();
          obs += ws.stage;
          obs *= 0.5;
        }
        ComplexMatrix e = ComplexMatrix::Zero(din, din);
        for (Eigen::Index r = 0; r < dres; ++r)
          for (Eigen::Index rp = 0; rp < dres; ++rp) {
            const cplx w = steady_.rho(rp, r);
            if (w != cplx{}) e.noalias() += w * obs.block(r * din, rp * din, din, din);
          }
        povm.elements[static_cast<std::size_t>(m * n + j)] = hermitian_part(e);
      }
    }
    return povm;
  }

 private:
  ReservoirSpec spec_;
  ProtocolParams params_;
  std::vector<int> input_dims_;
  SpaceLayout layout_;
  std::string fingerprint_;
  SteadyState steady_;
  std::shared_ptr<const Generator> generator_;
};

inline ReadoutVector run_protocol(const ReservoirSpec& spec, const ProtocolParams& params, const ComplexMatrix& rho_in,
                                  const std::vector<int>& input_dims) {
  return ProtocolRunner(spec, params, input_dims).run(rho_in);
}

struct ReadoutStatistics {
  ReadoutVector means;
  RealVector variances;
};

/// Two-level occupations are projectors, so <n^2> - <n>^2 = n (1 - n).
inline RealVector occupation_variances(const ReadoutVector& means) {
  return means.values.unaryExpr([](double n) { return n * (1.0 - n); });
}

inline ReadoutStatistics readout_statistics(const ReservoirSpec& spec, const ProtocolParams& params,
                                            const ComplexMatrix& rho_in, const std::vector<int>& input_dims) {
  ReadoutStatistics out;
  out.means = run_protocol(spec, params, rho_in, input_dims);
  out.variances = occupation_variances(out.means);
  return out;
}

}  // namespace qrst
