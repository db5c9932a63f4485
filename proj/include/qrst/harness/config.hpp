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
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qrst/dynamics.hpp"
#include "qrst/error.hpp"
#include "qrst/noise.hpp"
#include "qrst/states.hpp"
#include "qrst/training.hpp"
#include "qrst/wigner.hpp"

namespace qrst::harness {

using json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

enum class Scenario {
  fig2a_fidelity_vs_N,
  fig2grid_N_by_M,
  fig2ef_two_qubit_example,
  fig3_cv_reconstruction,
  fig4_cv_error_histogram,
  fig4err_noise_study,
  fig5_hopping,
};

inline constexpr std::array<std::pair<Scenario, const char*>, 7> kScenarioNames{{
    {Scenario::fig2a_fidelity_vs_N, "fig2a_fidelity_vs_N"},
    {Scenario::fig2grid_N_by_M, "fig2grid_N_by_M"},
    {Scenario::fig2ef_two_qubit_example, "fig2ef_two_qubit_example"},
    {Scenario::fig3_cv_reconstruction, "fig3_cv_reconstruction"},
    {Scenario::fig4_cv_error_histogram, "fig4_cv_error_histogram"},
    {Scenario::fig4err_noise_study, "fig4err_noise_study"},
    {Scenario::fig5_hopping, "fig5_hopping"},
}};

inline const char* to_string(Scenario s) {
  for (const auto& [k, name] : kScenarioNames)
    if (k == s) return name;
  return "?";
}

/// Accepts the full name or the prefix before the first underscore
/// ("fig2a", "fig4err").
inline Scenario parse_scenario(const std::string& text) {
  for (const auto& [k, name] : kScenarioNames) {
    const std::string full = name;
    if (text == full || text == full.substr(0, full.find('_'))) return k;
  }
  throw ConfigError("unknown scenario '" + text + "'");
}

/// One curve or grid of the scenario: a state family swept over (N, M).
struct Series {
  std::string label;
  FamilyKind family = FamilyKind::ginibre;
  int dim = 2;
  std::vector<std::array<int, 2>> points;  // (N, M)
  int n_train = 0;                         // 0 selects default_training_count
  int n_test = 50;
};

/// One cell of a noise sweep; every series point is re-trained under it.
struct NoiseCondition {
  double sigma_r = 0.0;
  double sigma_s = 0.0;
  int n_repetitions = 0;
  int n_train = 0;  // 0 keeps the series value
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  Scenario scenario = Scenario::fig2a_fidelity_vs_N;
  std::uint64_t master_seed = 0;
  int realizations = 10;
  std::string output_dir;

  double j_tilde = 1.0;
  double omega = 1.0;
  double pump = 0.3;

  ProtocolParams protocol;  // multiplexity is set per point
  double lambda = kDefaultRidgeLambda;
  ReadoutRoute route = ReadoutRoute::povm;

  std::vector<Series> series;
  std::vector<NoiseCondition> noise_conditions;  // empty: one noise-free condition

  SqueezedThermalRanges cv_ranges;
  int max_cutoff = 16;
  double grid_lo = -5.0;
  double grid_hi = 5.0;
  int grid_points = 41;
  int wigner_csv_states = 0;  // per (series point, realization)

  /// Fidelity is undefined for matrices with negative eigenvalues, which
  /// under-complete readouts produce routinely; min_eig still reports the
  /// raw reconstruction.
  bool project_unphysical = true;
  bool record_wall_time = false;
  int threads = 0;  // 0 defers to QRST_THREADS

  PhaseGrid grid() const { return PhaseGrid::uniform(grid_lo, grid_hi, grid_points); }

  StateFamily family_of(const Series& s) const {
    switch (s.family) {
      case FamilyKind::ginibre: return StateFamily::ginibre(s.dim);
      case FamilyKind::noisy_bell: return StateFamily::noisy_bell();
      case FamilyKind::squeezed_thermal: return StateFamily::squeezed_thermal(cv_ranges, max_cutoff, grid());
    }
    return {};
  }

  std::vector<NoiseCondition> conditions() const {
    return noise_conditions.empty() ? std::vector<NoiseCondition>{NoiseCondition{}} : noise_conditions;
  }

  /// Validates ranges; throws ConfigError naming the field.
  void validate() const {
    if (schema_version != kConfigSchemaVersion)
      throw SchemaVersionMismatch("config schema_version " + std::to_string(schema_version) + ", expected " +
                                  std::to_string(kConfigSchemaVersion));
    if (realizations < 1) throw ConfigError("config field 'realizations' must be >= 1");
    if (!(j_tilde >= 0.0)) throw ConfigError("config field 'reservoir.j_tilde' must be >= 0");
    if (!(omega >= 0.0)) throw ConfigError("config field 'reservoir.omega' must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("config field 'training.lambda' must be >= 0");
    if (max_cutoff < 2) throw ConfigError("config field 'cv.max_cutoff' must be >= 2");
    if (grid_points < 2 || !(grid_hi > grid_lo)) throw ConfigError("config field 'cv.grid' must span >= 2 points");
    if (series.empty()) throw ConfigError("config field 'series' must not be empty");
    for (std::size_t i = 0; i < series.size(); ++i) {
      const Series& s = series[i];
      const std::string where = "config field 'series[" + std::to_string(i) + "]";
      if (s.points.empty()) throw ConfigError(where + ".points' must not be empty");
      for (const auto& [n, m] : s.points) {
        if (n < 1) throw ConfigError(where + ".points' has N < 1");
        ProtocolParams p = protocol;
        p.multiplexity = m;
        try {
          p.validate();
        } catch (const ConfigError& e) {
          throw ConfigError(where + "' protocol at M=" + std::to_string(m) + ": " + e.what());
        }
      }
      if (s.family == FamilyKind::ginibre && s.dim < 2) throw ConfigError(where + ".dim' must be >= 2");
      if (s.n_train < 0) throw ConfigError(where + ".n_train' must be >= 0");
      if (s.n_test < 1) throw ConfigError(where + ".n_test' must be >= 1");
    }
    for (std::size_t i = 0; i < noise_conditions.size(); ++i) {
      const NoiseCondition& c = noise_conditions[i];
      const std::string where = "config field 'noise_conditions[" + std::to_string(i) + "]";
      if (!(c.sigma_r >= 0.0) || !(c.sigma_s >= 0.0) || c.n_repetitions < 0 || c.n_train < 0)
        throw ConfigError(where + "' has a negative entry");
    }
  }
};

inline std::vector<std::array<int, 2>> grid_points(const std::vector<int>& ns, const std::vector<int>& ms) {
  std::vector<std::array<int, 2>> out;
  for (int n : ns)
    for (int m : ms) out.push_back({n, m});
  return out;
}

/// Desk-scale defaults for each scenario.
inline ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.output_dir = std::string("qrst_out/") + to_string(scenario);
  auto ginibre = [](std::string label, int d, std::vector<std::array<int, 2>> pts, int n_test) {
    Series s;
    s.label = std::move(label);
    s.dim = d;
    s.points = std::move(pts);
    s.n_test = n_test;
    return s;
  };
  switch (scenario) {
    case Scenario::fig2a_fidelity_vs_N: {
      c.series.push_back(ginibre("qubit", 2, grid_points({1, 2, 3, 4}, {1}), 50));
      c.series.push_back(ginibre("qutrit", 3, grid_points({1, 2, 3, 4, 5, 6}, {1}), 50));
      c.series.push_back(ginibre("two_qubit", 4, grid_points({1, 2, 3, 4, 5}, {1}), 50));
      Series bell;
      bell.label = "noisy_bell";
      bell.family = FamilyKind::noisy_bell;
      bell.dim = 4;
      bell.points = grid_points({1, 2, 3, 4}, {1});
      bell.n_test = 50;
      c.series.push_back(bell);
      break;
    }
    case Scenario::fig2grid_N_by_M:
      c.series.push_back(ginibre("qubit", 2, grid_points({1, 2, 3}, {1, 2, 3}), 50));
      c.series.push_back(ginibre("qutrit", 3, grid_points({1, 2, 3, 4}, {1, 2, 3}), 30));
      break;
    case Scenario::fig2ef_two_qubit_example:
      c.series.push_back(ginibre("two_qubit", 4, {{2, 6}, {6, 6}}, 50));
      break;
    case Scenario::fig3_cv_reconstruction:
    case Scenario::fig4_cv_error_histogram: {
      Series cv;
      cv.label = "squeezed_thermal";
      cv.family = FamilyKind::squeezed_thermal;
      cv.dim = c.max_cutoff;
      if (scenario == Scenario::fig3_cv_reconstruction) {
        cv.points = {{4, 4}};
        cv.n_test = 8;
        c.wigner_csv_states = 8;
      } else {
        cv.points = {{2, 2}, {3, 2}, {3, 3}, {4, 4}};
        cv.n_test = 200;
        c.wigner_csv_states = 4;
      }
      c.series.push_back(cv);
      c.realizations = 1;
      break;
    }
    case Scenario::fig4err_noise_study: {
      Series s = ginibre("qubit", 2, grid_points({3, 4}, {1}), 32);
      s.n_train = 64;
      c.series.push_back(s);
      c.noise_conditions = {
          {0.0, 0.0, 0, 64}, {0.1, 0.0, 0, 64}, {0.0, 0.2, 0, 64}, {0.2, 0.2, 0, 64}, {0.2, 0.2, 0, 8},
      };
      break;
    }
    case Scenario::fig5_hopping:
      c.series.push_back(ginibre("qubit", 2, grid_points({1, 2, 3, 4}, {1}), 50));
      c.protocol.coupling_mode = CouplingMode::hopping;
      break;
  }
  return c;
}

namespace detail {

inline const char* json_type(const json& v) { return v.type_name(); }

/// Typed field access with dotted-path diagnostics; every key of the object
/// must be consumed, so misspelled fields are rejected.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("config field '" + where() + "': expected object, got " + json_type(obj_));
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!obj_.contains(key)) return;
    out = get<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!obj_.contains(key)) throw ConfigError("config field '" + field(key) + "' is required");
    return get<T>(key);
  }

  const json& sub(const std::string& key) {
    used_.insert(key);
    return obj_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("config field '" + field(it.key()) + "': unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  template <class T>
  T get(const std::string& key) {
    used_.insert(key);
    const json& v = obj_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("config field '" + field(key) + "': expected boolean, got " + json_type(v));
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer())
        throw ConfigError("config field '" + field(key) + "': expected integer, got " + json_type(v));
      if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw ConfigError("config field '" + field(key) + "': expected non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("config field '" + field(key) + "': expected number, got " + json_type(v));
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("config field '" + field(key) + "': expected string, got " + json_type(v));
    }
    return v.get<T>();
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

inline std::vector<int> read_int_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError("config field '" + path + "': expected array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError("config field '" + path + "': expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

inline FamilyKind parse_family(const std::string& s, const std::string& path) {
  if (s == "ginibre") return FamilyKind::ginibre;
  if (s == "noisy_bell") return FamilyKind::noisy_bell;
  if (s == "squeezed_thermal") return FamilyKind::squeezed_thermal;
  throw ConfigError("config field '" + path + "': unknown family '" + s + "'");
}

inline Series parse_series(const json& v, const std::string& path, const ExperimentConfig& base) {
  FieldReader r(v, path);
  Series s;
  s.label = r.require<std::string>("label");
  s.family = parse_family(r.require<std::string>("family"), r.field("family"));
  s.dim = s.family == FamilyKind::noisy_bell ? 4 : s.family == FamilyKind::squeezed_thermal ? base.max_cutoff : 2;
  r.read("dim", s.dim);
  if (r.has("points")) {
    if (r.has("n_sites") || r.has("multiplexity"))
      throw ConfigError("config field '" + path + "': give either points or n_sites/multiplexity");
    const json& pts = r.sub("points");
    if (!pts.is_array()) throw ConfigError("config field '" + r.field("points") + "': expected array of [N, M]");
    for (const auto& p : pts) {
      const auto pair = read_int_list(p, r.field("points"));
      if (pair.size() != 2) throw ConfigError("config field '" + r.field("points") + "': expected [N, M] pairs");
      s.points.push_back({pair[0], pair[1]});
    }
  } else {
    const auto ns = read_int_list(r.has("n_sites") ? r.sub("n_sites") : json::array(), r.field("n_sites"));
    const auto ms = r.has("multiplexity") ? read_int_list(r.sub("multiplexity"), r.field("multiplexity")) : std::vector<int>{1};
    s.points = grid_points(ns, ms);
  }
  r.read("n_train", s.n_train);
  r.read("n_test", s.n_test);
  r.finish();
  return s;
}

}  // namespace detail

/// Overlays a JSON document on the scenario defaults. `schema_version` is
/// required; any other absent field keeps its default.
inline ExperimentConfig config_from_json(const json& doc, std::optional<Scenario> scenario_hint = std::nullopt) {
  detail::FieldReader root(doc, "");
  const int version = root.require<int>("schema_version");
  if (version != kConfigSchemaVersion)
    throw SchemaVersionMismatch("config schema_version " + std::to_string(version) + ", expected " +
                                std::to_string(kConfigSchemaVersion));
  Scenario scenario;
  if (root.has("scenario")) {
    scenario = parse_scenario(root.require<std::string>("scenario"));
    if (scenario_hint && *scenario_hint != scenario)
      throw ConfigError(std::string("config field 'scenario' is ") + to_string(scenario) + " but " +
                        to_string(*scenario_hint) + " was requested");
  } else if (scenario_hint) {
    scenario = *scenario_hint;
  } else {
    throw ConfigError("config field 'scenario' is required");
  }
  ExperimentConfig c = default_config(scenario);
  root.read("master_seed", c.master_seed);
  root.read("realizations", c.realizations);
  root.read("output_dir", c.output_dir);
  root.read("project_unphysical", c.project_unphysical);
  root.read("record_wall_time", c.record_wall_time);
  root.read("wigner_csv_states", c.wigner_csv_states);
  root.read("threads", c.threads);

  if (root.has("reservoir")) {
    detail::FieldReader r(root.sub("reservoir"), "reservoir");
    r.read("j_tilde", c.j_tilde);
    r.read("omega", c.omega);
    r.read("pump", c.pump);
    r.finish();
  }
  if (root.has("protocol")) {
    detail::FieldReader r(root.sub("protocol"), "protocol");
    r.read("t1", c.protocol.t1);
    r.read("tau", c.protocol.tau);
    r.read("dt", c.protocol.dt);
    if (r.has("coupling_mode")) {
      const auto m = r.require<std::string>("coupling_mode");
      if (m == "cascaded") c.protocol.coupling_mode = CouplingMode::cascaded;
      else if (m == "hopping") c.protocol.coupling_mode = CouplingMode::hopping;
      else throw ConfigError("config field 'protocol.coupling_mode': expected cascaded or hopping");
    }
    if (r.has("cascade_form")) {
      const auto f = r.require<std::string>("cascade_form");
      if (f == "collective") c.protocol.cascade_form = CascadeForm::collective;
      else if (f == "literal") c.protocol.cascade_form = CascadeForm::literal;
      else throw ConfigError("config field 'protocol.cascade_form': expected collective or literal");
    }
    r.finish();
  }
  if (root.has("training")) {
    detail::FieldReader r(root.sub("training"), "training");
    r.read("lambda", c.lambda);
    if (r.has("route")) {
      const auto route = r.require<std::string>("route");
      if (route == "povm") c.route = ReadoutRoute::povm;
      else if (route == "direct") c.route = ReadoutRoute::direct;
      else throw ConfigError("config field 'training.route': expected povm or direct");
    }
    r.finish();
  }
  if (root.has("cv")) {
    detail::FieldReader r(root.sub("cv"), "cv");
    r.read("r_max", c.cv_ranges.r_max);
    r.read("n_th_max", c.cv_ranges.n_th_max);
    r.read("max_cutoff", c.max_cutoff);
    if (r.has("grid")) {
      detail::FieldReader g(r.sub("grid"), "cv.grid");
      g.read("lo", c.grid_lo);
      g.read("hi", c.grid_hi);
      g.read("points", c.grid_points);
      g.finish();
    }
    r.finish();
  }
  if (root.has("series")) {
    const json& arr = root.sub("series");
    if (!arr.is_array()) throw ConfigError("config field 'series': expected array");
    c.series.clear();
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.series.push_back(detail::parse_series(arr[i], "series[" + std::to_string(i) + "]", c));
  }
  if (root.has("noise_conditions")) {
    const json& arr = root.sub("noise_conditions");
    if (!arr.is_array()) throw ConfigError("config field 'noise_conditions': expected array");
    c.noise_conditions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      detail::FieldReader r(arr[i], "noise_conditions[" + std::to_string(i) + "]");
      NoiseCondition n;
      r.read("sigma_r", n.sigma_r);
      r.read("sigma_s", n.sigma_s);
      r.read("n_repetitions", n.n_repetitions);
      r.read("n_train", n.n_train);
      r.finish();
      c.noise_conditions.push_back(n);
    }
  }
  root.finish();
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<Scenario> scenario_hint = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(doc, scenario_hint);
}

inline json config_to_json(const ExperimentConfig& c) {
  json series = json::array();
  for (const auto& s : c.series) {
    json pts = json::array();
    for (const auto& [n, m] : s.points) pts.push_back({n, m});
    series.push_back({{"label", s.label},
                      {"family", to_string(s.family)},
                      {"dim", s.dim},
                      {"points", pts},
                      {"n_train", s.n_train},
                      {"n_test", s.n_test}});
  }
  json conditions = json::array();
  for (const auto& n : c.noise_conditions)
    conditions.push_back({{"sigma_r", n.sigma_r},
                          {"sigma_s", n.sigma_s},
                          {"n_repetitions", n.n_repetitions},
                          {"n_train", n.n_train}});
  return {
      {"schema_version", c.schema_version},
      {"scenario", to_string(c.scenario)},
      {"master_seed", c.master_seed},
      {"realizations", c.realizations},
      {"output_dir", c.output_dir},
      {"reservoir", {{"j_tilde", c.j_tilde}, {"omega", c.omega}, {"pump", c.pump}}},
      {"protocol",
       {{"t1", c.protocol.t1},
        {"tau", c.protocol.tau},
        {"dt", c.protocol.dt},
        {"coupling_mode", to_string(c.protocol.coupling_mode)},
        {"cascade_form", to_string(c.protocol.cascade_form)}}},
      {"training", {{"lambda", c.lambda}, {"route", c.route == ReadoutRoute::povm ? "povm" : "direct"}}},
      {"cv",
       {{"r_max", c.cv_ranges.r_max},
        {"n_th_max", c.cv_ranges.n_th_max},
        {"max_cutoff", c.max_cutoff},
        {"grid", {{"lo", c.grid_lo}, {"hi", c.grid_hi}, {"points", c.grid_points}}}}},
      {"series", series},
      {"noise_conditions", conditions},
      {"wigner_csv_states", c.wigner_csv_states},
      {"project_unphysical", c.project_unphysical},
      {"record_wall_time", c.record_wall_time},
  };
}

}  // namespace qrst::harness
