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

// Rule generation: the (kernel position, input pillar, output pillar) mapping
// of a sparse convolution, produced by a streaming align / row-merge /
// column-dilate pass over CPR coordinates, plus a brute-force reference and
// cycle-cost models for the streaming unit and two baseline mappers.

#ifndef PILLARFLOW_RULEGEN_HPP_
#define PILLARFLOW_RULEGEN_HPP_

#include <cstdint>
#include <vector>

#include "pillarflow/core.hpp"

namespace pillarflow {

struct RulePair {
  int32_t input = 0;
  int32_t output = 0;
  friend auto operator<=>(const RulePair&, const RulePair&) = default;
};

struct Rule {
  int32_t weight_pos = 0;
  int32_t input = 0;
  int32_t output = 0;
};

// Rules organized by kernel position ("rule buffers").
struct RuleSet {
  ConvVariant variant;
  GridDims in_dims;
  int32_t num_inputs = 0;
  CprCoords out_coords;
  std::vector<std::vector<RulePair>> buffers;  // one per kernel position

  int32_t num_outputs() const { return out_coords.size(); }
  int64_t total_rules() const;
  std::vector<int64_t> counts() const;
  // True when every buffer has non-decreasing input and output streams.
  bool IsMonotone() const;
  // Throws kInvariantViolation on out-of-range indices or unsorted buffers.
  void Validate() const;
};

RuleSet GenerateRules(const CprCoords& coords, const ConvVariant& variant);
// Same as GenerateRules, refilling `out` and reusing its storage.
void GenerateRulesInto(const CprCoords& coords, const ConvVariant& variant,
                       RuleSet* out);

// Enumerates every (input, kernel position) pair directly.
RuleSet BruteForceRules(const CprCoords& coords, const ConvVariant& variant);
void BruteForceRulesInto(const CprCoords& coords, const ConvVariant& variant,
                         RuleSet* out);

// Same multiset of rules per buffer and same output coordinates.
bool EquivalentRuleSets(const RuleSet& a, const RuleSet& b);

struct RuleGenCostConfig {
  double rgu_rules_per_cycle = 3.0;  // one per horizontal-dilation bank
  int64_t rgu_pipeline_fill = 8;     // align + merge + dilate stage latency
  int64_t hash_main_table_factor = 2;
  int64_t hash_chain_factor = 9;
  int64_t hash_probe_cost = 1;
  int64_t sort_merge_width = 64;
  int64_t kernel_positions = 9;
};

int64_t RguCycles(int64_t num_inputs, int64_t total_rules,
                  const RuleGenCostConfig& cfg);
int64_t RguCycles(const RuleSet& rules, const RuleGenCostConfig& cfg);

struct HashBaselineResult {
  int64_t cycles = 0;
  int64_t operations = 0;  // inserts + queries
  int64_t probes = 0;      // chain nodes visited
  int64_t unique_keys = 0;
};

// Single-lane chained hash table of 2P buckets, multiplicative hash
// h(key) = (key * 0x9E3779B97F4A7C15) >> 32 mod buckets; each insert or query
// costs 1 cycle plus hash_probe_cost per chain node visited.
HashBaselineResult HashBaselineCycles(const CprCoords& coords,
                                      const ConvVariant& variant,
                                      const RuleGenCostConfig& cfg);

// Bitonic merge-sort mapper: blocks = ceil(P*K/N),
// cycles = ceil(blocks * log2(N) * max(1, log2(blocks)) + P*K/N).
int64_t MergeSortBaselineCycles(int64_t num_pillars,
                                const RuleGenCostConfig& cfg);

}  // namespace pillarflow

#endif  // PILLARFLOW_RULEGEN_HPP_
