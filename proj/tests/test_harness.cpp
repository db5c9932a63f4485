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

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrst/harness/aggregate.hpp"
#include "qrst/harness/artifacts.hpp"
#include "qrst/harness/config.hpp"
#include "qrst/harness/parallel.hpp"
#include "qrst/harness/scenario.hpp"

namespace qrst::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qrst_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string config_error(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig tiny_config(const fs::path& out) {
  ExperimentConfig c = default_config(Scenario::fig2a_fidelity_vs_N);
  Series s;
  s.label = "qubit";
  s.dim = 2;
  s.points = {{1, 1}, {2, 1}};
  s.n_test = 4;
  c.series = {s};
  c.realizations = 2;
  c.master_seed = 3;
  c.output_dir = out.string();
  return c;
}

TEST(Scenario, NamesAndPrefixes) {
  EXPECT_EQ(parse_scenario("fig2a"), Scenario::fig2a_fidelity_vs_N);
  EXPECT_EQ(parse_scenario("fig4err"), Scenario::fig4err_noise_study);
  EXPECT_EQ(parse_scenario("fig5_hopping"), Scenario::fig5_hopping);
  EXPECT_THROW(parse_scenario("fig9"), ConfigError);
  for (const auto& [k, name] : kScenarioNames) EXPECT_EQ(parse_scenario(name), k);
}

TEST(Config, CaptionDefaults) {
  for (const auto& [k, name] : kScenarioNames) {
    const ExperimentConfig c = default_config(k);
    EXPECT_NO_THROW(c.validate()) << name;
    EXPECT_EQ(c.j_tilde, 1.0);
    EXPECT_EQ(c.omega, 1.0);
    EXPECT_EQ(c.pump, 0.3);
    EXPECT_EQ(c.protocol.t1, 7.6);
    EXPECT_EQ(c.protocol.tau, 1.5);
  }
  EXPECT_EQ(default_config(Scenario::fig2a_fidelity_vs_N).realizations, 10);
  EXPECT_EQ(default_config(Scenario::fig5_hopping).protocol.coupling_mode, CouplingMode::hopping);
}

TEST(Config, DiagnosticsNameTheField) {
  EXPECT_NE(config_error({{"scenario", "fig2a"}}).find("schema_version"), std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}}).find("scenario"), std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}, {"scenario", "fig2a"}, {"reservoir", {{"omegaa", 1.0}}}})
                .find("reservoir.omegaa"),
            std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}, {"scenario", "fig2a"}, {"realizations", "ten"}}).find("realizations"),
            std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}, {"scenario", "fig2a"}, {"series", {{{"label", "q"}}}}})
                .find("series[0].family"),
            std::string::npos);
  EXPECT_NE(config_error({{"schema_version", 1}, {"scenario", "fig2a"}, {"protocol", {{"dt", 0.5}}}}).find("dt"),
            std::string::npos);
  EXPECT_THROW(config_from_json({{"schema_version", 2}, {"scenario", "fig2a"}}), SchemaVersionMismatch);
  EXPECT_THROW(config_from_json({{"schema_version", 1}, {"scenario", "fig2a"}}, Scenario::fig5_hopping), ConfigError);
}

TEST(Config, OverlayAndRoundtrip) {
  const json doc = {{"schema_version", 1},
                    {"scenario", "fig4err"},
                    {"master_seed", 42},
                    {"reservoir", {{"pump", 0.25}}},
                    {"series", {{{"label", "q"}, {"family", "ginibre"}, {"n_sites", {2, 3}}, {"multiplexity", {1, 2}}}}},
                    {"noise_conditions", {{{"sigma_r", 0.1}}}}};
  const ExperimentConfig c = config_from_json(doc);
  EXPECT_EQ(c.master_seed, 42u);
  EXPECT_EQ(c.pump, 0.25);
  ASSERT_EQ(c.series.size(), 1u);
  EXPECT_EQ(c.series[0].points.size(), 4u);
  EXPECT_EQ(c.series[0].dim, 2);
  EXPECT_EQ(c.noise_conditions.at(0).sigma_r, 0.1);
  const json echo = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(echo)), echo);
}

TEST(Config, LoadFromFile) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "c.json") << R"({"schema_version": 1, "scenario": "fig5", "realizations": 2})";
  EXPECT_EQ(load_config((dir / "c.json").string()).realizations, 2);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_config((dir / "bad.json").string()), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

TEST(Aggregate, SummaryExamples) {
  const SummaryStats one = summarize({0.8});
  EXPECT_EQ(one.mean, 0.8);
  EXPECT_EQ(one.std, 0.0);
  EXPECT_EQ(one.median, 0.8);
  // (0.9, 1.0): mean 0.95, sample std sqrt(0.005).
  const SummaryStats two = summarize({0.9, 1.0});
  EXPECT_NEAR(two.mean, 0.95, 1e-15);
  EXPECT_NEAR(two.std, std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(two.median, 0.95, 1e-15);
  const SummaryStats odd = summarize({3.0, 1.0, 2.0});
  EXPECT_EQ(odd.median, 2.0);
  EXPECT_EQ(odd.min, 1.0);
  EXPECT_EQ(odd.max, 3.0);
  EXPECT_THROW(summarize({}), EmptyInput);
  EXPECT_THROW(aggregate({}), EmptyInput);
}

TEST(Aggregate, HistogramBins) {
  const Histogram h = histogram({-0.5, 0.0, 0.05, 0.1, 0.99, 1.0, 1.5, std::nan("")}, wigner_error_edges());
  EXPECT_EQ(h.edges.size(), 21u);
  EXPECT_EQ(h.underflow, 1u);
  EXPECT_EQ(h.overflow, 1u);
  EXPECT_EQ(h.counts[0], 1u);
  EXPECT_EQ(h.counts[1], 1u);
  EXPECT_EQ(h.counts[2], 1u);
  EXPECT_EQ(h.counts[19], 2u);
  EXPECT_EQ(min_eigenvalue_edges().size(), 41u);
  EXPECT_THROW(histogram({1.0}, {0.0}), ConfigError);
}

TEST(Aggregate, GroupsInInsertionOrder) {
  std::vector<ResultRow> rows;
  auto row = [](int n, double v, double e) {
    ResultRow r;
    r.scenario = "s";
    r.n_sites = n;
    r.multiplexity = 1;
    r.dim = 2;
    r.metric_kind = "fidelity";
    r.metric_value = v;
    r.min_eig = e;
    return r;
  };
  rows.push_back(row(3, 0.9, 0.1));
  rows.push_back(row(1, 0.5, -0.2));
  rows.push_back(row(3, 1.0, -0.05));
  const auto groups = aggregate(rows);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].n_sites, 3);
  EXPECT_EQ(groups[0].metric.count, 2u);
  EXPECT_NEAR(groups[0].metric.mean, 0.95, 1e-15);
  EXPECT_EQ(groups[0].below_threshold, 1u);
  EXPECT_EQ(groups[1].below_threshold, 1u);
  EXPECT_EQ(to_json(groups[0])["min_eig_below_-0.01"], 1);
}

TEST(Aggregate, RowFormatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  ResultRow r;
  r.scenario = "x[series=q]";
  r.n_sites = 2;
  r.multiplexity = 3;
  r.dim = 2;
  r.metric_kind = "fidelity";
  r.metric_value = 0.5;
  r.min_eig = -0.25;
  std::ostringstream os;
  write_row(os, r);
  EXPECT_EQ(os.str(), "x[series=q],0,2,3,2,0,fidelity,0.5,-0.25,0\n");
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(0, 100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsLowestIndexError) {
  try {
    parallel_for(0, 20, 3, [](std::size_t i) {
      if (i == 7 || i == 13) throw ConfigError("index " + std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("index 7"), std::string::npos);
  }
}

TEST(Parallel, ThreadResolution) {
  EXPECT_EQ(resolve_threads(3), 3);
  ::setenv("QRST_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(0), 5);
  ::setenv("QRST_THREADS", "zero", 1);
  EXPECT_THROW(resolve_threads(0), ConfigError);
  ::unsetenv("QRST_THREADS");
  EXPECT_EQ(resolve_threads(0), 1);
}

class ArtifactsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_ = sample_reservoir({2, 1.0, 1.0, 0.3, 1}, 77);
    const StateFamily fam = StateFamily::ginibre(2);
    ProtocolParams p;
    p.multiplexity = 2;
    const ProtocolRunner runner(spec_, p, fam.input_dims);
    map_ = train(fam, build_dataset(fam, 8, ReadoutSource(runner, ReadoutRoute::povm), 5), runner, 1e-6);
  }
  ReservoirSpec spec_;
  TrainedReadoutMap map_;
};

TEST_F(ArtifactsTest, RoundtripIsBitExact) {
  const fs::path dir = scratch("artifacts");
  save_artifacts(spec_, map_, dir);
  const auto [spec, map] = load_artifacts(dir);
  EXPECT_EQ(spec.couplings, spec_.couplings);
  EXPECT_EQ(spec.lattice_edges, spec_.lattice_edges);
  EXPECT_EQ(spec.input_weights, spec_.input_weights);
  EXPECT_EQ(spec.eta, spec_.eta);
  EXPECT_EQ(spec.seed, spec_.seed);
  EXPECT_EQ(fingerprint(spec), fingerprint(spec_));
  EXPECT_EQ(map.m_out, map_.m_out);
  EXPECT_EQ(map.m_const, map_.m_const);
  EXPECT_EQ(map.lambda_effective, map_.lambda_effective);
  EXPECT_EQ(map.protocol.multiplexity, 2);
  EXPECT_EQ(map.protocol.dt, map_.protocol.dt);
  EXPECT_EQ(map.input_dims, map_.input_dims);
  EXPECT_EQ(map.target_dims, map_.target_dims);
}

TEST_F(ArtifactsTest, TamperedSpecIsRejected) {
  json j = reservoir_to_json(spec_);
  j["couplings"][0] = j["couplings"][0].get<double>() + 1e-9;
  EXPECT_THROW(reservoir_from_json(j), FingerprintMismatch);
  json bumped = reservoir_to_json(spec_);
  bumped["schema_version"] = 99;
  EXPECT_THROW(reservoir_from_json(bumped), SchemaVersionMismatch);
  json map_bumped = map_to_json(map_);
  map_bumped["schema_version"] = 99;
  EXPECT_THROW(map_from_json(map_bumped), SchemaVersionMismatch);
}

TEST_F(ArtifactsTest, MapAgainstOtherReservoirIsRejected) {
  const ReservoirSpec other = sample_reservoir({2, 1.0, 1.0, 0.3, 1}, 78);
  EXPECT_THROW(check_linkage(other, map_), FingerprintMismatch);
  const fs::path dir = scratch("linkage");
  save_artifacts(spec_, map_, dir);
  save_reservoir(other, dir / kReservoirFile);
  EXPECT_THROW(load_artifacts(dir), FingerprintMismatch);
}

TEST(RunScenario, DeterministicAcrossThreadCounts) {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const ScenarioOutput out = run_scenario(tiny_config(a), 1);
  run_scenario(tiny_config(b), 3);
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  ASSERT_TRUE(fs::exists(a / "manifest.json"));
  EXPECT_EQ(out.rows.size(), 2u * 2 * 4);
  const std::string csv = slurp(a / "results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsHeader);
  const json manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["row_count"], 16);
  EXPECT_EQ(manifest["software"]["version"], kVersion);
  EXPECT_EQ(manifest["tasks"].size(), 4u);
  EXPECT_EQ(manifest["aggregates"].size(), 2u);
  // wall_ms stays zero unless requested.
  for (const auto& r : out.rows) EXPECT_EQ(r.wall_ms, 0.0);
}

TEST(RunScenario, SeedChangesResults) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ExperimentConfig ca = tiny_config(a), cb = tiny_config(b);
  cb.master_seed = 4;
  run_scenario(ca);
  run_scenario(cb);
  EXPECT_NE(slurp(a / "results.csv"), slurp(b / "results.csv"));
}

TEST(RunScenario, NoiseConditionsShareStatesAndTagRows) {
  const fs::path dir = scratch("noise");
  ExperimentConfig c = tiny_config(dir);
  c.scenario = Scenario::fig4err_noise_study;
  c.series[0].points = {{3, 1}};
  c.series[0].n_train = 16;
  c.realizations = 1;
  c.noise_conditions = {{0.0, 0.0, 0, 16}, {0.0, 0.2, 0, 16}, {0.2, 0.2, 0, 4}};
  const ScenarioOutput out = run_scenario(c);
  ASSERT_EQ(out.summaries.size(), 3u);
  EXPECT_EQ(out.summaries[0].scenario, "fig4err_noise_study[series=qubit;sigma_r=0;sigma_s=0;train=16]");
  EXPECT_EQ(out.summaries[2].scenario, "fig4err_noise_study[series=qubit;sigma_r=0.2;sigma_s=0.2;train=4]");
  // Frozen gains are absorbed by the linear map.
  EXPECT_NEAR(out.summaries[1].metric.mean, out.summaries[0].metric.mean, 1e-3);
}

TEST(RunScenario, ContinuousVariableWritesWignerFiles) {
  const fs::path dir = scratch("cv");
  ExperimentConfig c = default_config(Scenario::fig3_cv_reconstruction);
  c.output_dir = dir.string();
  c.series[0].points = {{2, 2}};
  c.series[0].n_test = 2;
  c.series[0].n_train = 20;
  c.max_cutoff = 12;
  c.cv_ranges = {0.2, 0.1};
  c.grid_points = 11;
  c.wigner_csv_states = 1;
  const ScenarioOutput out = run_scenario(c);
  EXPECT_EQ(out.rows.size(), 2u);
  EXPECT_EQ(out.rows[0].metric_kind, "wigner_error");
  EXPECT_TRUE(std::isnan(out.rows[0].min_eig));
  const fs::path csv = dir / "wigner" / "squeezed_thermal_N2_M2_r0_s0.csv";
  ASSERT_TRUE(fs::exists(csv));
  const std::string text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "x,p,w_true,w_tomo");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 121);
  EXPECT_FALSE(fs::exists(dir / "wigner" / "squeezed_thermal_N2_M2_r0_s1.csv"));
}

struct CliResult {
  int code = -1;
  std::string err;
  std::string out;
};

CliResult cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(QRST_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

TEST(Cli, MissingConfigFieldExitsOne) {
  const fs::path dir = scratch("cli_config");
  std::ofstream(dir / "c.json") << R"({"scenario": "fig2a"})";
  const CliResult r = cli("experiment fig2a --config " + (dir / "c.json").string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("schema_version"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagExitsOne) {
  const fs::path dir = scratch("cli_flag");
  EXPECT_EQ(cli("experiment fig2a --bogus", dir).code, 1);
  EXPECT_EQ(cli("", dir).code, 1);
}

TEST(Cli, ReconstructWithForeignReservoirExitsOne) {
  const fs::path a = scratch("cli_a"), b = scratch("cli_b");
  ASSERT_EQ(cli("reservoir new --n-sites 3 --seed 1 --out " + a.string(), a).code, 0);
  ASSERT_EQ(cli("train --dim 2 --seed 2 --out " + a.string(), a).code, 0);
  const CliResult ok = cli("reconstruct --state-seed 9 --out " + a.string(), a);
  ASSERT_EQ(ok.code, 0) << ok.err;
  const json report = json::parse(ok.out);
  EXPECT_GT(report["fidelity"].get<double>(), 0.99);

  ASSERT_EQ(cli("reservoir new --n-sites 3 --seed 5 --out " + b.string(), b).code, 0);
  const CliResult bad = cli("reconstruct --state-seed 9 --reservoir " + (b / kReservoirFile).string() + " --map " +
                                (a / kMapFile).string(),
                            b);
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("FingerprintMismatch"), std::string::npos) << bad.err;
}

TEST(Cli, NumericalFailureExitsTwo) {
  const fs::path dir = scratch("cli_numeric");
  const CliResult r = cli("wigner --r 5 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NoConvergence"), std::string::npos) << r.err;
}

TEST(Cli, WignerWritesCsv) {
  const fs::path dir = scratch("cli_wigner");
  const CliResult r = cli("wigner --r 0.3 --n-th 0.1 --points 21 --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir / "wigner.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 21 * 21);
}

}  // namespace
}  // namespace qrst::harness
