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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrst/dynamics.hpp"
#include "qrst/harness/aggregate.hpp"
#include "qrst/harness/config.hpp"
#include "qrst/harness/parallel.hpp"
#include "qrst/noise.hpp"
#include "qrst/reservoir.hpp"
#include "qrst/rng.hpp"
#include "qrst/tomography.hpp"
#include "qrst/training.hpp"
#include "qrst/version.hpp"

namespace qrst::harness {

/// Seed tree below master_seed. Training and test states depend on the
/// realization and series only, so every (N, M) point and noise condition
/// of a realization sees the same states; noise draws are shared across
/// conditions in the same way.
struct SeedPlan {
  std::uint64_t master = 0;

  std::uint64_t reservoir(int realization, int n_sites, int n_inputs) const {
    return derive_seed(master, {stream::reservoir, u(realization), u(n_sites), u(n_inputs)});
  }
  std::uint64_t train_states(int realization, std::size_t series) const {
    return derive_seed(master, {stream::train_states, u(realization), series});
  }
  std::uint64_t test_states(int realization, std::size_t series) const {
    return derive_seed(master, {stream::test_states, u(realization), series});
  }
  std::uint64_t site_gains(int realization, std::size_t series, int n_sites, int m) const {
    return derive_seed(master, {stream::site_gains, u(realization), series, u(n_sites), u(m)});
  }
  std::uint64_t noise(std::uint64_t which, int realization, std::size_t series, int n_sites, int m,
                      std::size_t state) const {
    return derive_seed(master, {which, u(realization), series, u(n_sites), u(m), state});
  }

  static constexpr const char* kDescription =
      "reservoir=derive(master,{1,realization,N,K}); train=derive(master,{2,realization,series})"
      " then state i=derive(train,{i}); test likewise with stream 3; noise per state"
      "=derive(master,{4|5,realization,series,N,M,i}); site gains=derive(derive(master,{6,realization,series,N,M}),{6})";

 private:
  static std::uint64_t u(int v) { return static_cast<std::uint64_t>(v); }
};

struct TaskKey {
  std::size_t series = 0;
  int n_sites = 0;
  int multiplexity = 0;
  int realization = 0;
};

struct TaskRecord {
  TaskKey key;
  std::uint64_t reservoir_seed = 0;
  std::string fingerprint;
  double steady_residual = 0.0;
  std::size_t clamp_events = 0;
  double wall_ms = 0.0;
};

struct ScenarioOutput {
  std::filesystem::path dir;
  std::vector<ResultRow> rows;
  std::vector<TaskRecord> tasks;
  std::vector<GroupSummary> summaries;
};

inline std::string condition_tag(const ExperimentConfig& c, const Series& s, const NoiseCondition& n, int n_train) {
  std::string tag = std::string(to_string(c.scenario)) + "[series=" + s.label;
  if (!c.noise_conditions.empty()) {
    tag += ";sigma_r=" + format_double(n.sigma_r) + ";sigma_s=" + format_double(n.sigma_s);
    if (n.n_repetitions > 0) tag += ";n_rep=" + std::to_string(n.n_repetitions);
    tag += ";train=" + std::to_string(n_train);
  }
  return tag + "]";
}

namespace detail {

inline ReadoutVector column_readout(const Dataset& d, Eigen::Index i, const ProtocolRunner& runner) {
  ReadoutVector r;
  r.values = d.readouts.col(i);
  r.times = runner.params().sample_times();
  r.n_sites = runner.spec().n_sites;
  r.reservoir_fingerprint = runner.reservoir_fingerprint();
  return r;
}

inline int training_count(const Series& s, const NoiseCondition& n, const StateFamily& f) {
  if (n.n_train > 0) return n.n_train;
  if (s.n_train > 0) return s.n_train;
  return default_training_count(f);
}

struct TaskOutput {
  std::vector<ResultRow> rows;
  TaskRecord record;
  std::vector<std::pair<std::string, std::string>> files;  // relative path, contents
};

inline TaskOutput run_task(const ExperimentConfig& cfg, const TaskKey& key) {
  const auto start = std::chrono::steady_clock::now();
  const SeedPlan seeds{cfg.master_seed};
  const Series& series = cfg.series[key.series];
  const StateFamily family = cfg.family_of(series);

  ReservoirParams rp;
  rp.n_sites = key.n_sites;
  rp.j_tilde = cfg.j_tilde;
  rp.omega = cfg.omega;
  rp.pump = cfg.pump;
  rp.n_inputs = static_cast<int>(family.input_dims.size());
  TaskOutput out;
  out.record.key = key;
  out.record.reservoir_seed = seeds.reservoir(key.realization, key.n_sites, rp.n_inputs);
  const ReservoirSpec spec = sample_reservoir(rp, out.record.reservoir_seed);
  ProtocolParams pp = cfg.protocol;
  pp.multiplexity = key.multiplexity;
  const ProtocolRunner runner(spec, pp, family.input_dims);
  out.record.fingerprint = runner.reservoir_fingerprint();
  out.record.steady_residual = runner.steady_state().residual;
  const ReadoutSource source(runner, cfg.route);

  const auto conditions = cfg.conditions();
  int max_train = 0;
  for (const auto& c : conditions) max_train = std::max(max_train, training_count(series, c, family));
  const Dataset train_clean = build_dataset(family, max_train, source, seeds.train_states(key.realization, key.series));
  const Dataset test_clean = build_dataset(family, series.n_test, source, seeds.test_states(key.realization, key.series));

  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    const NoiseCondition& cond = conditions[ci];
    const int n_train = training_count(series, cond, family);
    NoiseConfig nc;
    nc.sigma_r = cond.sigma_r;
    nc.sigma_s = cond.sigma_s;
    nc.n_repetitions = cond.n_repetitions;
    nc.seed = seeds.site_gains(key.realization, key.series, key.n_sites, key.multiplexity);
    const NoiseModel noise(nc, train_clean.readouts.rows());
    ClampCounter clamps;

    Dataset train;
    train.readouts = train_clean.readouts.leftCols(n_train);
    train.targets = train_clean.targets.leftCols(n_train);
    if (nc.enabled()) {
      for (int i = 0; i < n_train; ++i) {
        Rng rng(seeds.noise(stream::noise_train, key.realization, key.series, key.n_sites, key.multiplexity,
                            static_cast<std::size_t>(i)));
        train.readouts.col(i) = noise.apply(column_readout(train_clean, i, runner), rng, &clamps).values;
      }
    }
    const TrainedReadoutMap map = qrst::train(family, train, runner, cfg.lambda);
    const std::string tag = condition_tag(cfg, series, cond, n_train);

    for (int i = 0; i < series.n_test; ++i) {
      ReadoutVector readout = column_readout(test_clean, i, runner);
      if (nc.enabled()) {
        Rng rng(seeds.noise(stream::noise_test, key.realization, key.series, key.n_sites, key.multiplexity,
                            static_cast<std::size_t>(i)));
        readout = noise.apply(std::move(readout), rng, &clamps);
      }
      const ComplexMatrix& truth = test_clean.states[static_cast<std::size_t>(i)];
      const ReconstructionReport rep = evaluate(map, readout, truth, cfg.project_unphysical);
      ResultRow row;
      row.scenario = tag;
      row.realization = key.realization;
      row.n_sites = key.n_sites;
      row.multiplexity = key.multiplexity;
      row.dim = family.dim;
      row.state_idx = i;
      row.metric_kind = rep.fidelity ? "fidelity" : "wigner_error";
      row.metric_value = rep.fidelity ? *rep.fidelity : *rep.wigner_error;
      row.min_eig = rep.min_eigenvalue;
      out.rows.push_back(row);

      const std::string stem = series.label + "_N" + std::to_string(key.n_sites) + "_M" +
                               std::to_string(key.multiplexity) + "_r" + std::to_string(key.realization) +
                               (conditions.size() > 1 ? "_c" + std::to_string(ci) : std::string{}) + "_s" +
                               std::to_string(i);
      if (rep.wigner_error && i < cfg.wigner_csv_states) {
        const WignerGrid truth_w = WignerGrid::unflatten(family.grid, test_clean.targets.col(i));
        std::ostringstream os;
        os << "x,p,w_true,w_tomo\n";
        const auto& g = family.grid;
        for (std::size_t a = 0; a < g.x.size(); ++a)
          for (std::size_t b = 0; b < g.p.size(); ++b) {
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            os << format_double(g.x[a]) << ',' << format_double(g.p[b]) << ',' << format_double(truth_w.w(ia, ib))
               << ',' << format_double(rep.reconstructed.wigner.w(ia, ib)) << '\n';
          }
        out.files.emplace_back("wigner/" + stem + ".csv", os.str());
      }
      if (rep.fidelity && cfg.scenario == Scenario::fig2ef_two_qubit_example && key.realization == 0 && i == 0) {
        std::ostringstream os;
        os << "i,j,re_true,im_true,re_tomo,im_tomo\n";
        const ComplexMatrix& tomo = rep.reconstructed.rho;
        for (Eigen::Index a = 0; a < truth.rows(); ++a)
          for (Eigen::Index b = 0; b < truth.cols(); ++b)
            os << a << ',' << b << ',' << format_double(truth(a, b).real()) << ',' << format_double(truth(a, b).imag())
               << ',' << format_double(tomo(a, b).real()) << ',' << format_double(tomo(a, b).imag()) << '\n';
        out.files.emplace_back("example_rho/" + stem + ".csv", os.str());
      }
    }
    out.record.clamp_events += clamps.events;
  }
  out.record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (cfg.record_wall_time && !out.rows.empty())
    for (auto& r : out.rows) r.wall_ms = out.record.wall_ms / static_cast<double>(out.rows.size());
  return out;
}

}  // namespace detail

inline std::vector<TaskKey> enumerate_tasks(const ExperimentConfig& cfg) {
  std::vector<TaskKey> tasks;
  for (std::size_t s = 0; s < cfg.series.size(); ++s)
    for (const auto& [n, m] : cfg.series[s].points)
      for (int r = 0; r < cfg.realizations; ++r) tasks.push_back({s, n, m, r});
  return tasks;
}

/// Runs every (series point, realization) task. results.csv grows in task
/// order as tasks finish; manifest.json is written last. Per-task wall
/// times always go to timings.csv; results.csv carries them only with
/// record_wall_time, so that it is reproducible byte for byte.
inline ScenarioOutput run_scenario(const ExperimentConfig& cfg, int threads = 0) {
  cfg.validate();
  namespace fs = std::filesystem;
  ScenarioOutput result;
  result.dir = cfg.output_dir;
  fs::create_directories(result.dir);
  fs::remove(result.dir / "manifest.json");
  std::ofstream csv(result.dir / "results.csv", std::ios::trunc);
  std::ofstream timings(result.dir / "timings.csv", std::ios::trunc);
  if (!csv || !timings) throw ConfigError("cannot write into " + result.dir.string());
  csv << kResultsHeader << '\n';
  timings << "series,N,M,realization,wall_ms\n";

  const auto tasks = enumerate_tasks(cfg);
  const int workers = resolve_threads(threads > 0 ? threads : cfg.threads);
  const std::size_t chunk = static_cast<std::size_t>(workers);
  for (std::size_t begin = 0; begin < tasks.size(); begin += chunk) {
    const std::size_t end = std::min(tasks.size(), begin + chunk);
    std::vector<detail::TaskOutput> outs(end - begin);
    parallel_for(begin, end, workers, [&](std::size_t i) { outs[i - begin] = detail::run_task(cfg, tasks[i]); });
    for (auto& o : outs) {
      for (const auto& r : o.rows) write_row(csv, r);
      for (const auto& [rel, contents] : o.files) {
        const fs::path p = result.dir / rel;
        fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::trunc);
        f << contents;
      }
      const TaskKey& k = o.record.key;
      timings << cfg.series[k.series].label << ',' << k.n_sites << ',' << k.multiplexity << ',' << k.realization << ','
              << format_double(o.record.wall_ms) << '\n';
      result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
      result.tasks.push_back(o.record);
    }
    csv.flush();
    timings.flush();
  }
  csv.close();
  timings.close();

  result.summaries = aggregate(result.rows);
  json task_list = json::array();
  std::size_t clamps = 0;
  for (const auto& t : result.tasks) {
    clamps += t.clamp_events;
    task_list.push_back({{"series", cfg.series[t.key.series].label},
                         {"N", t.key.n_sites},
                         {"M", t.key.multiplexity},
                         {"realization", t.key.realization},
                         {"reservoir_seed", t.reservoir_seed},
                         {"reservoir_fingerprint", t.fingerprint},
                         {"steady_state_residual", t.steady_residual},
                         {"clamp_events", t.clamp_events}});
  }
  json aggregates = json::array();
  for (const auto& g : result.summaries) aggregates.push_back(to_json(g));
  const json manifest = {
      {"schema_version", kConfigSchemaVersion},
      {"software", {{"name", "qrst"}, {"version", kVersion}}},
      {"scenario", to_string(cfg.scenario)},
      {"config", config_to_json(cfg)},
      {"seeds", {{"master_seed", cfg.master_seed}, {"derivation", SeedPlan::kDescription}}},
      {"files",
       {{"results", "results.csv"},
        {"results_header", kResultsHeader},
        {"timings", "timings.csv"},
        {"wigner_header", "x,p,w_true,w_tomo"}}},
      {"histogram_edges", {{"wigner_error", wigner_error_edges()}, {"min_eig", min_eigenvalue_edges()}}},
      {"row_count", result.rows.size()},
      {"clamp_events", clamps},
      {"tasks", task_list},
      {"aggregates", aggregates},
  };
  std::ofstream mf(result.dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';
  return result;
}

}  // namespace qrst::harness
