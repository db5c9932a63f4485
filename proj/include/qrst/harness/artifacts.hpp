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

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "qrst/dynamics.hpp"
#include "qrst/error.hpp"
#include "qrst/reservoir.hpp"
#include "qrst/training.hpp"

namespace qrst::harness {

using json = nlohmann::json;

inline constexpr int kArtifactSchemaVersion = 1;

namespace detail {

inline json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline RealMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw ConfigError("matrix row count mismatch");
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("matrix column count mismatch");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

inline json vector_to_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline RealVector vector_from_json(const json& a) {
  RealVector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

inline void check_schema(const json& j, const std::string& what) {
  if (!j.contains("schema_version")) throw ConfigError(what + ": field 'schema_version' is required");
  const int v = j.at("schema_version").get<int>();
  if (v != kArtifactSchemaVersion)
    throw SchemaVersionMismatch(what + " schema_version " + std::to_string(v) + ", expected " +
                                std::to_string(kArtifactSchemaVersion));
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace detail

inline json protocol_to_json(const ProtocolParams& p) {
  return {{"t1", p.t1},
          {"tau", p.tau},
          {"multiplexity", p.multiplexity},
          {"dt", p.dt},
          {"coupling_mode", to_string(p.coupling_mode)},
          {"cascade_form", to_string(p.cascade_form)}};
}

inline ProtocolParams protocol_from_json(const json& j) {
  ProtocolParams p;
  p.t1 = j.at("t1").get<double>();
  p.tau = j.at("tau").get<double>();
  p.multiplexity = j.at("multiplexity").get<int>();
  p.dt = j.at("dt").get<double>();
  const auto mode = j.at("coupling_mode").get<std::string>();
  if (mode != "cascaded" && mode != "hopping") throw ConfigError("unknown coupling_mode " + mode);
  p.coupling_mode = mode == "cascaded" ? CouplingMode::cascaded : CouplingMode::hopping;
  const auto form = j.at("cascade_form").get<std::string>();
  if (form != "collective" && form != "literal") throw ConfigError("unknown cascade_form " + form);
  p.cascade_form = form == "collective" ? CascadeForm::collective : CascadeForm::literal;
  p.validate();
  return p;
}

/// The stored fingerprint is recomputed on load; any edit to a field makes
/// the two disagree.
inline json reservoir_to_json(const ReservoirSpec& spec) {
  json edges = json::array();
  for (const auto& [i, j] : spec.lattice_edges) edges.push_back({i, j});
  return {{"schema_version", kArtifactSchemaVersion},
          {"kind", "reservoir_spec"},
          {"fingerprint", fingerprint(spec)},
          {"n_sites", spec.n_sites},
          {"lattice_edges", edges},
          {"couplings", spec.couplings},
          {"pump", spec.pump},
          {"decay", spec.decay},
          {"j_tilde", spec.j_tilde},
          {"omega", spec.omega},
          {"input_weights", detail::matrix_to_json(spec.input_weights)},
          {"eta", detail::vector_to_json(spec.eta)},
          {"seed", spec.seed}};
}

inline ReservoirSpec reservoir_from_json(const json& j) {
  detail::check_schema(j, "reservoir spec");
  ReservoirSpec spec;
  try {
    spec.n_sites = j.at("n_sites").get<int>();
    for (const auto& e : j.at("lattice_edges")) spec.lattice_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    spec.couplings = j.at("couplings").get<std::vector<double>>();
    spec.pump = j.at("pump").get<double>();
    spec.decay = j.at("decay").get<double>();
    spec.j_tilde = j.at("j_tilde").get<double>();
    spec.omega = j.at("omega").get<double>();
    spec.input_weights = detail::matrix_from_json(j.at("input_weights"));
    spec.eta = detail::vector_from_json(j.at("eta"));
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("reservoir spec: ") + e.what());
  }
  const std::string stored = j.value("fingerprint", std::string{});
  const std::string actual = fingerprint(spec);
  if (stored != actual)
    throw FingerprintMismatch("reservoir spec fingerprint " + stored + " does not match its contents (" + actual + ")");
  return spec;
}

inline json map_to_json(const TrainedReadoutMap& map) {
  json j = {{"schema_version", kArtifactSchemaVersion},
            {"kind", "trained_readout_map"},
            {"reservoir_fingerprint", map.reservoir_fingerprint},
            {"target_kind", to_string(map.target_kind)},
            {"target_dims", map.target_dims},
            {"input_dims", map.input_dims},
            {"lambda", map.lambda},
            {"lambda_effective", map.lambda_effective},
            {"protocol", protocol_to_json(map.protocol)},
            {"m_out", detail::matrix_to_json(map.m_out)},
            {"m_const", detail::vector_to_json(map.m_const)}};
  if (map.target_kind == TargetKind::wigner_grid) j["grid"] = {{"x", map.grid.x}, {"p", map.grid.p}};
  return j;
}

inline TrainedReadoutMap map_from_json(const json& j) {
  detail::check_schema(j, "readout map");
  TrainedReadoutMap map;
  try {
    map.reservoir_fingerprint = j.at("reservoir_fingerprint").get<std::string>();
    const auto kind = j.at("target_kind").get<std::string>();
    if (kind != "bloch_vector" && kind != "wigner_grid") throw ConfigError("unknown target_kind " + kind);
    map.target_kind = kind == "bloch_vector" ? TargetKind::bloch_vector : TargetKind::wigner_grid;
    map.target_dims = j.at("target_dims").get<std::vector<int>>();
    map.input_dims = j.at("input_dims").get<std::vector<int>>();
    map.lambda = j.at("lambda").get<double>();
    map.lambda_effective = j.at("lambda_effective").get<double>();
    map.protocol = protocol_from_json(j.at("protocol"));
    map.m_out = detail::matrix_from_json(j.at("m_out"));
    map.m_const = detail::vector_from_json(j.at("m_const"));
    if (map.target_kind == TargetKind::wigner_grid) {
      map.grid.x = j.at("grid").at("x").get<std::vector<double>>();
      map.grid.p = j.at("grid").at("p").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("readout map: ") + e.what());
  }
  if (map.m_const.size() != map.m_out.rows()) throw DimMismatch("readout map m_const length differs from m_out rows");
  return map;
}

inline void check_linkage(const ReservoirSpec& spec, const TrainedReadoutMap& map) {
  const std::string fp = fingerprint(spec);
  if (map.reservoir_fingerprint != fp)
    throw FingerprintMismatch("readout map was trained on reservoir " + map.reservoir_fingerprint +
                              ", supplied reservoir is " + fp);
  if (map.m_out.cols() != static_cast<Eigen::Index>(spec.n_sites) * map.protocol.multiplexity)
    throw DimMismatch("readout map expects " + std::to_string(map.m_out.cols()) + " readouts, reservoir gives " +
                      std::to_string(spec.n_sites * map.protocol.multiplexity));
}

inline constexpr const char* kReservoirFile = "reservoir.json";
inline constexpr const char* kMapFile = "readout_map.json";

inline void save_reservoir(const ReservoirSpec& spec, const std::filesystem::path& path) {
  detail::write_json_file(path, reservoir_to_json(spec));
}

inline ReservoirSpec load_reservoir(const std::filesystem::path& path) {
  return reservoir_from_json(detail::read_json_file(path));
}

inline void save_map(const TrainedReadoutMap& map, const std::filesystem::path& path) {
  detail::write_json_file(path, map_to_json(map));
}

inline TrainedReadoutMap load_map(const std::filesystem::path& path) {
  return map_from_json(detail::read_json_file(path));
}

/// Writes reservoir.json and readout_map.json into `dir`.
inline void save_artifacts(const ReservoirSpec& spec, const TrainedReadoutMap& map, const std::filesystem::path& dir) {
  check_linkage(spec, map);
  save_reservoir(spec, dir / kReservoirFile);
  save_map(map, dir / kMapFile);
}

inline std::pair<ReservoirSpec, TrainedReadoutMap> load_artifacts(const std::filesystem::path& dir) {
  ReservoirSpec spec = load_reservoir(dir / kReservoirFile);
  TrainedReadoutMap map = load_map(dir / kMapFile);
  check_linkage(spec, map);
  return {std::move(spec), std::move(map)};
}

}  // namespace qrst::harness
