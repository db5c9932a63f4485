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

// Command-line front end: reservoir construction, training, reconstruction,
// scenario runs and Wigner evaluation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrst/qrst.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> dt;
  int threads = 0;
};

fs::path out_dir(const Globals& g, const char* fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw qrst::ConfigError("cannot write " + path.string());
  f << text;
}

qrst::ProtocolParams protocol_with(const Globals& g, int multiplexity, const std::string& mode) {
  qrst::ProtocolParams p;
  p.multiplexity = multiplexity;
  if (g.dt) p.dt = *g.dt;
  if (mode == "hopping") p.coupling_mode = qrst::CouplingMode::hopping;
  else if (mode != "cascaded") throw qrst::ConfigError("--coupling must be cascaded or hopping");
  p.validate();
  return p;
}

qrst::StateFamily family_named(const std::string& name, int dim, int max_cutoff) {
  if (name == "ginibre") return qrst::StateFamily::ginibre(dim);
  if (name == "noisy_bell") return qrst::StateFamily::noisy_bell();
  if (name == "squeezed_thermal") return qrst::StateFamily::squeezed_thermal({}, max_cutoff);
  throw qrst::ConfigError("--family must be ginibre, noisy_bell or squeezed_thermal");
}

/// The state family a stored map was trained for, as far as the map tells.
qrst::StateFamily family_of_map(const qrst::TrainedReadoutMap& map) {
  if (map.target_kind == qrst::TargetKind::wigner_grid)
    return qrst::StateFamily::squeezed_thermal({}, map.input_dims.at(0), map.grid);
  return qrst::StateFamily::ginibre(map.target_dims.at(0));
}

json matrix_json(const qrst::ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ir = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ir.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return {{"re", re}, {"im", im}};
}

int run(int argc, char** argv) {
  CLI::App app{"Quantum reservoir state tomography"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON experiment configuration");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--dt", g.dt, "RK4 step in units of hbar/gamma");
  app.add_option("--threads", g.threads, "worker threads (default: QRST_THREADS or 1)");

  // reservoir new
  auto* reservoir = app.add_subcommand("reservoir", "reservoir construction");
  reservoir->require_subcommand(1);
  reservoir->fallthrough();
  auto* res_new = reservoir->add_subcommand("new", "sample a random reservoir and write reservoir.json");
  qrst::ReservoirParams rp;
  res_new->add_option("--n-sites", rp.n_sites, "number of sites N")->required();
  res_new->add_option("--inputs", rp.n_inputs, "number of input modes");
  res_new->add_option("--j-tilde", rp.j_tilde, "spectral radius of the hopping matrix");
  res_new->add_option("--omega", rp.omega, "input weight scale");
  res_new->add_option("--pump", rp.pump, "pump amplitude P");

  // train
  auto* train = app.add_subcommand("train", "train a readout map for a stored reservoir");
  std::string train_reservoir, family = "ginibre", coupling = "cascaded";
  int dim = 2, multiplexity = 1, count = 0, max_cutoff = 16;
  double lambda = qrst::kDefaultRidgeLambda;
  train->add_option("--reservoir", train_reservoir, "reservoir.json (default: <out>/reservoir.json)");
  train->add_option("--family", family, "ginibre, noisy_bell or squeezed_thermal");
  train->add_option("--dim", dim, "Hilbert-space dimension of Ginibre states");
  train->add_option("--multiplexity", multiplexity, "readout times M");
  train->add_option("--count", count, "training states (default 2 D^2, 96 for squeezed_thermal)");
  train->add_option("--lambda", lambda, "ridge parameter relative to the readout Gram scale");
  train->add_option("--max-cutoff", max_cutoff, "Fock cutoff of squeezed-thermal inputs");
  train->add_option("--coupling", coupling, "cascaded or hopping");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "reconstruct a state from readouts");
  std::string recon_reservoir, recon_map, readout_file;
  std::optional<std::uint64_t> state_seed;
  bool project = false;
  recon->add_option("--reservoir", recon_reservoir, "reservoir.json (default: <out>/reservoir.json)");
  recon->add_option("--map", recon_map, "readout_map.json (default: <out>/readout_map.json)");
  auto* opt_readout = recon->add_option("--readout", readout_file, "JSON readout vector");
  recon->add_option("--state-seed", state_seed, "simulate a random test state with this seed")->excludes(opt_readout);
  recon->add_flag("--project", project, "replace an unphysical reconstruction by the nearest state");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a scenario and write results.csv and manifest.json");
  std::string scenario_name;
  std::optional<int> realizations;
  bool record_wall = false;
  experiment->add_option("scenario", scenario_name, "scenario name, e.g. fig2a or fig2a_fidelity_vs_N")->required();
  experiment->add_option("--realizations", realizations, "override the realization count");
  experiment->add_flag("--record-wall-time", record_wall, "fill the wall_ms column of results.csv");

  // wigner
  auto* wig = app.add_subcommand("wigner", "Wigner function of a squeezed-thermal state");
  qrst::SqueezedThermalParams sq;
  double lo = -5.0, hi = 5.0;
  int points = 41;
  wig->add_option("--r", sq.r, "squeezing magnitude");
  wig->add_option("--theta", sq.theta, "squeezing phase");
  wig->add_option("--n-th", sq.n_th, "thermal occupation");
  wig->add_option("--lo", lo, "grid lower bound");
  wig->add_option("--hi", hi, "grid upper bound");
  wig->add_option("--points", points, "grid points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (res_new->parsed()) {
    const auto spec = qrst::sample_reservoir(rp, g.seed.value_or(0));
    const fs::path path = out_dir(g, ".") / qrst::harness::kReservoirFile;
    qrst::harness::save_reservoir(spec, path);
    std::cout << path.string() << ' ' << qrst::fingerprint(spec) << '\n';
    return 0;
  }

  if (train->parsed()) {
    const fs::path dir = out_dir(g, ".");
    const auto spec = qrst::harness::load_reservoir(train_reservoir.empty() ? dir / qrst::harness::kReservoirFile
                                                                             : fs::path(train_reservoir));
    const auto fam = family_named(family, dim, max_cutoff);
    const qrst::ProtocolRunner runner(spec, protocol_with(g, multiplexity, coupling), fam.input_dims);
    const qrst::ReadoutSource source(runner, qrst::ReadoutRoute::povm);
    const int n = count > 0 ? count : qrst::default_training_count(fam);
    const auto data = qrst::build_dataset(fam, n, source, qrst::derive_seed(g.seed.value_or(0), {qrst::stream::train_states}));
    const auto map = qrst::train(fam, data, runner, lambda);
    qrst::harness::save_map(map, dir / qrst::harness::kMapFile);
    std::cout << (dir / qrst::harness::kMapFile).string() << '\n';
    return 0;
  }

  if (recon->parsed()) {
    const fs::path dir = out_dir(g, ".");
    const auto spec = qrst::harness::load_reservoir(recon_reservoir.empty() ? dir / qrst::harness::kReservoirFile
                                                                             : fs::path(recon_reservoir));
    const auto map = qrst::harness::load_map(recon_map.empty() ? dir / qrst::harness::kMapFile : fs::path(recon_map));
    qrst::harness::check_linkage(spec, map);
    json report;
    qrst::ReadoutVector readout;
    std::optional<qrst::ComplexMatrix> truth;
    if (!readout_file.empty()) {
      std::ifstream in(readout_file);
      if (!in) throw qrst::ConfigError("cannot open " + readout_file);
      const json doc = json::parse(in);
      const json& values = doc.is_array() ? doc : doc.at("values");
      readout.values = qrst::RealVector(static_cast<Eigen::Index>(values.size()));
      for (std::size_t i = 0; i < values.size(); ++i) readout.values(static_cast<Eigen::Index>(i)) = values[i].get<double>();
      if (doc.is_object() && doc.contains("reservoir_fingerprint"))
        readout.reservoir_fingerprint = doc.at("reservoir_fingerprint").get<std::string>();
    } else {
      qrst::ProtocolParams p = map.protocol;
      if (g.dt) p.dt = *g.dt;
      const auto fam = family_of_map(map);
      const qrst::ProtocolRunner runner(spec, p, map.input_dims);
      qrst::Rng rng(state_seed.value_or(g.seed.value_or(0)));
      const auto sample = qrst::draw_state(fam, rng);
      readout = qrst::ReadoutSource(runner, qrst::ReadoutRoute::direct)(sample.rho);
      truth = sample.rho;
    }
    if (truth) {
      const auto rep = qrst::evaluate(map, readout, *truth, project);
      if (rep.fidelity) report["fidelity"] = *rep.fidelity;
      if (rep.wigner_error) report["wigner_error"] = *rep.wigner_error;
      if (!std::isnan(rep.min_eigenvalue)) report["min_eigenvalue"] = rep.min_eigenvalue;
      report["projected"] = rep.projected;
      if (rep.reconstructed.kind == qrst::TargetKind::bloch_vector) report["rho"] = matrix_json(rep.reconstructed.rho);
    } else {
      const auto rec = qrst::reconstruct(map, readout);
      if (rec.kind == qrst::TargetKind::bloch_vector) {
        qrst::ComplexMatrix rho = rec.rho;
        report["min_eigenvalue"] = qrst::min_eigenvalue(rho);
        report["projected"] = project && report["min_eigenvalue"].get<double>() < 0.0;
        if (project) rho = qrst::project_physical(rho);
        report["rho"] = matrix_json(rho);
      } else {
        std::ostringstream os;
        qrst::write_wigner_csv(os, rec.wigner);
        write_text(dir / "reconstructed_wigner.csv", os.str());
        report["wigner_csv"] = (dir / "reconstructed_wigner.csv").string();
      }
    }
    report["reservoir_fingerprint"] = map.reservoir_fingerprint;
    std::cout << report.dump(2) << '\n';
    return 0;
  }

  if (experiment->parsed()) {
    const auto scenario = qrst::harness::parse_scenario(scenario_name);
    qrst::harness::ExperimentConfig cfg =
        g.config.empty() ? qrst::harness::default_config(scenario) : qrst::harness::load_config(g.config, scenario);
    if (g.seed) cfg.master_seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    if (g.dt) cfg.protocol.dt = *g.dt;
    if (realizations) cfg.realizations = *realizations;
    if (record_wall) cfg.record_wall_time = true;
    const auto result = qrst::harness::run_scenario(cfg, g.threads);
    for (const auto& s : result.summaries)
      std::cout << s.scenario << " N=" << s.n_sites << " M=" << s.multiplexity << ' ' << s.metric_kind
                << " mean=" << s.metric.mean << " std=" << s.metric.std << " median=" << s.metric.median << '\n';
    std::cout << (result.dir / "manifest.json").string() << '\n';
    return 0;
  }

  if (wig->parsed()) {
    sq.cutoff = qrst::find_effective_cutoff(sq.r, sq.theta, sq.n_th);
    const auto rho = qrst::squeezed_thermal(sq);
    const auto w = qrst::wigner(rho.matrix, qrst::PhaseGrid::uniform(lo, hi, points));
    std::ostringstream os;
    qrst::write_wigner_csv(os, w);
    const fs::path path = out_dir(g, ".") / "wigner.csv";
    write_text(path, os.str());
    std::cout << path.string() << " cutoff=" << sq.cutoff << " mass=" << w.mass() << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qrst::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == qrst::ErrorKind::validation ? 1 : 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: ConfigError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
