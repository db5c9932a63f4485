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
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qrst/error.hpp"

namespace qrst::harness {

inline constexpr const char* kResultsHeader =
    "scenario,realization,N,M,D,state_idx,metric_kind,metric_value,min_eig,wall_ms";

/// One test-state reconstruction.
struct ResultRow {
  std::string scenario;  // scenario name plus a [key=value;...] condition tag
  int realization = 0;
  int n_sites = 0;
  int multiplexity = 0;
  int dim = 0;
  int state_idx = 0;
  std::string metric_kind;  // "fidelity" or "wigner_error"
  double metric_value = 0.0;
  double min_eig = 0.0;  // NaN for Wigner targets
  double wall_ms = 0.0;
};

/// Shortest round-trip decimal; "nan" for NaN.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline void write_row(std::ostream& os, const ResultRow& r) {
  os << r.scenario << ',' << r.realization << ',' << r.n_sites << ',' << r.multiplexity << ',' << r.dim << ','
     << r.state_idx << ',' << r.metric_kind << ',' << format_double(r.metric_value) << ',' << format_double(r.min_eig)
     << ',' << format_double(r.wall_ms) << '\n';
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

inline SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("no values to summarize");
  SummaryStats s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t h = s.count / 2;
  s.median = s.count % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  return s;
}

/// Counts per bin [e_i, e_{i+1}); the last bin is closed. Values outside
/// the edges go to the underflow and overflow counters.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
};

inline std::vector<double> uniform_edges(double lo, double hi, int bins) {
  std::vector<double> e;
  for (int i = 0; i <= bins; ++i) e.push_back(lo + (hi - lo) * i / bins);
  return e;
}

inline Histogram histogram(const std::vector<double>& values, std::vector<double> edges) {
  if (edges.size() < 2) throw ConfigError("histogram needs at least two edges");
  Histogram h;
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (v < h.edges.front()) {
      ++h.underflow;
    } else if (v > h.edges.back()) {
      ++h.overflow;
    } else {
      auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
      std::size_t bin = static_cast<std::size_t>(it - h.edges.begin()) - 1;
      h.counts[std::min(bin, h.counts.size() - 1)] += 1;
    }
  }
  return h;
}

/// Bins shared by every scenario so panels are comparable.
inline std::vector<double> wigner_error_edges() { return uniform_edges(0.0, 1.0, 20); }
inline std::vector<double> min_eigenvalue_edges() { return uniform_edges(-0.3, 0.1, 40); }

inline constexpr double kUnphysicalThreshold = -0.01;

/// Statistics of one (scenario tag, N, M, D) group.
struct GroupSummary {
  std::string scenario;
  int n_sites = 0;
  int multiplexity = 0;
  int dim = 0;
  std::string metric_kind;
  SummaryStats metric;
  std::size_t below_threshold = 0;  // min_eig < kUnphysicalThreshold
  Histogram metric_histogram;       // wigner_error groups
  Histogram min_eig_histogram;      // fidelity groups
};

inline std::vector<GroupSummary> aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw EmptyInput("no result rows to aggregate");
  using Key = std::tuple<std::string, int, int, int, std::string>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  std::vector<Key> order;
  for (const auto& r : rows) {
    Key k{r.scenario, r.n_sites, r.multiplexity, r.dim, r.metric_kind};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const auto& k : order) {
    const auto& members = groups.at(k);
    GroupSummary g;
    std::tie(g.scenario, g.n_sites, g.multiplexity, g.dim, g.metric_kind) = k;
    std::vector<double> metric, min_eig;
    for (const ResultRow* r : members) {
      metric.push_back(r->metric_value);
      min_eig.push_back(r->min_eig);
      if (r->min_eig < kUnphysicalThreshold) ++g.below_threshold;
    }
    g.metric = summarize(metric);
    if (g.metric_kind == "wigner_error")
      g.metric_histogram = histogram(metric, wigner_error_edges());
    else
      g.min_eig_histogram = histogram(min_eig, min_eigenvalue_edges());
    out.push_back(std::move(g));
  }
  return out;
}

inline nlohmann::json to_json(const SummaryStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"median", s.median}, {"max", s.max}};
}

inline nlohmann::json to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}, {"underflow", h.underflow}, {"overflow", h.overflow}};
}

inline nlohmann::json to_json(const GroupSummary& g) {
  nlohmann::json j = {{"scenario", g.scenario},       {"N", g.n_sites},
                      {"M", g.multiplexity},          {"D", g.dim},
                      {"metric_kind", g.metric_kind}, {"metric", to_json(g.metric)},
                      {"min_eig_below_-0.01", g.below_threshold}};
  if (g.metric_kind == "wigner_error")
    j["metric_histogram"] = to_json(g.metric_histogram);
  else
    j["min_eig_histogram"] = to_json(g.min_eig_histogram);
  return j;
}

}  // namespace qrst::harness
