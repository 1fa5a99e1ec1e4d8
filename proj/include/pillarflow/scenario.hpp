/* Copyright 2026 The Pillarflow Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Experiment drivers behind the command-line tool: synthetic occupancy maps,
// network runs with per-layer simulation and dense-equivalent comparison,
// parameter sweeps, mapping-cost comparison and the oracle validation suite.

#ifndef PILLARFLOW_SCENARIO_HPP_
#define PILLARFLOW_SCENARIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pillarflow/core.hpp"
#include "pillarflow/network.hpp"
#include "pillarflow/sim.hpp"

namespace pillarflow {

// Cluster centers are distinct cells drawn uniformly; members are Gaussian
// offsets (sigma = cluster_radius) around a uniformly chosen center, added
// until round(density * cells) distinct pillars exist. With radius 0 every
// member sits on its center, so P = cluster_count. Features are uniform
// int8. Throws kInvalidDensity unless 0 < density <= 1.
CprTensor GenSyntheticPillars(GridDims dims, int32_t channels, double density,
                              int32_t cluster_count, double cluster_radius,
                              uint64_t seed);

struct SyntheticInput {
  double density = 0.05;
  int32_t cluster_count = 64;
  double cluster_radius = 6.0;
  uint64_t seed = 1;
};

struct ScenarioConfig {
  NetworkSpec network;
  std::string network_label;  // reported as-is (e.g. the file path)
  HwConfig hw = HwConfig::HighEnd();
  std::string input_path;     // CPR binary; empty selects synthetic
  SyntheticInput synthetic;
  bool weight_grouping = false;
  bool ganged_scatter = false;
  bool simulate = true;
  bool dense_compare = true;
  EnergyConfig energy;
  // Overrides the threshold of every SpConv-P layer when >= 0.
  double threshold_override = -1.0;
};

// Functional run plus optional per-layer simulation. The report carries the
// raw counters every derived ratio is computed from. The "timestamp" field
// is the only nondeterministic content.
nlohmann::ordered_json RunScenario(const ScenarioConfig& cfg);

struct SweepConfig {
  std::vector<double> densities;    // empty keeps the base density
  std::vector<double> thresholds;   // empty keeps the network thresholds
  std::vector<uint64_t> seeds;      // empty keeps the base seed
  int threads = 0;                  // 0 = hardware concurrency
};

// One summary row per (density, threshold, seed) point, in that nesting
// order; points run concurrently.
nlohmann::ordered_json RunSweep(const ScenarioConfig& base,
                                const SweepConfig& sweep);
std::string SweepToCsv(const nlohmann::ordered_json& sweep);

struct RulegenComparisonRow {
  int64_t pillars = 0;
  double rgu_cycles = 0;
  double hash_cycles = 0;
  double sort_cycles = 0;
  double hash_ratio() const { return hash_cycles / rgu_cycles; }
  double sort_ratio() const { return sort_cycles / rgu_cycles; }
};

struct RulegenComparison {
  double density = 0.0;
  std::vector<RulegenComparisonRow> rows;
  double rgu_r2 = 0.0;  // linear fit of rgu cycles over P
  double mean_hash_ratio = 0.0;
  double mean_sort_ratio = 0.0;
};

// Uniform random SpConv inputs on a square grid sized for `density`; cycle
// counts are averaged over the seeds.
RulegenComparison CompareRulegen(const std::vector<int64_t>& pillar_counts,
                                 double density,
                                 const std::vector<uint64_t>& seeds,
                                 const RuleGenCostConfig& cfg = {});
nlohmann::ordered_json RulegenComparisonToJson(const RulegenComparison& c);
std::string RulegenComparisonToCsv(const RulegenComparison& c);

// Coefficient of determination of the least-squares line through (x, y).
double LinearFitR2(const std::vector<double>& x, const std::vector<double>& y);

struct ValidationReport {
  int64_t checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Randomized oracle-equivalence suite: streaming vs brute-force rules,
// rule-stream monotonicity, tiled execution vs the dense reference under
// several buffer capacities.
ValidationReport RunValidation(int32_t trials, uint64_t seed);
nlohmann::ordered_json ValidationToJson(const ValidationReport& r);

}  // namespace pillarflow

#endif  // PILLARFLOW_SCENARIO_HPP_
