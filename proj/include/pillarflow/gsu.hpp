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

// Gather-scatter execution of one sparse convolution layer: active-tile
// planning over the rule buffers, per-kernel-position int8 matrix products,
// offset-addressed scatter-accumulate with boundary psum carry, pruning and
// requantization.

#ifndef PILLARFLOW_GSU_HPP_
#define PILLARFLOW_GSU_HPP_

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pillarflow/core.hpp"
#include "pillarflow/rulegen.hpp"

namespace pillarflow {

// One active tile. The input window [input_start, input_end] is a contiguous
// run of global input indices; every rule whose input lies in it belongs to
// this tile. The output window [output_start, output_end] is the output
// buffer span the tile accumulates into. Outputs below flush_end are final
// once the tile completes; [flush_end, output_end] carries into the next tile.
struct TileDescriptor {
  int32_t input_start = 0;
  int32_t input_end = -1;
  int32_t output_start = 0;
  int32_t output_end = -1;
  int32_t flush_end = 0;
  std::vector<std::pair<int64_t, int64_t>> rule_slices;  // [begin, end) per buffer

  int32_t input_count() const { return input_end - input_start + 1; }
  int32_t output_count() const { return output_end - output_start + 1; }
  int32_t carried_outputs() const {
    return std::max(0, output_end - flush_end + 1);
  }
  int64_t rule_count() const;
};

struct TileCapacity {
  int32_t cap_in = std::numeric_limits<int32_t>::max();
  int32_t cap_out = std::numeric_limits<int32_t>::max();
};

// Smallest capacities PlanTiles accepts for these rules.
TileCapacity MinimalCapacities(const RuleSet& rules);

// Single pass over the rule buffers. Throws kCapacityTooSmall when an output
// needs more distinct inputs than cap_in, or one input's output span exceeds
// cap_out.
std::vector<TileDescriptor> PlanTiles(const RuleSet& rules, int32_t cap_in,
                                      int32_t cap_out);

struct LayerSpec {
  std::string name;
  ConvVariant variant;
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  WeightKernel weights;
  RequantSpec requant;
  bool prune_after_requant = false;
  RepresentativeKind representative = RepresentativeKind::kL2;

  double prune_threshold() const { return variant.threshold(); }
  void Validate() const;
};

struct OpStats {
  int64_t macs_performed = 0;
  int64_t dense_macs_equivalent = 0;
  int64_t pillars_in = 0;
  int64_t pillars_out = 0;
  int64_t pillars_pruned = 0;
  int64_t bytes_gathered = 0;
  int64_t bytes_scattered = 0;
  int64_t rules = 0;
  int64_t tiles = 0;
  int64_t psum_carried = 0;   // outputs copied between consecutive tiles
  int64_t gather_records = 0; // pillar fetches into the input buffer
  int64_t max_gathers_per_input = 0;

  double ops_savings() const {
    return macs_performed == 0 ? 0.0
                               : static_cast<double>(dense_macs_equivalent) /
                                     static_cast<double>(macs_performed);
  }
};

// MACs of the dense Conv2D / transposed conv over the full grid.
int64_t DenseMacs(const ConvVariant& variant, GridDims in, int32_t C, int32_t M);

struct LayerResult {
  CprTensor output;       // int8, after pruning and requantization
  CprTensor accumulators; // int32, all masked outputs before pruning
  OpStats stats;
  RuleSet rules;
  std::vector<TileDescriptor> tiles;
};

LayerResult RunLayer(const CprTensor& input, const LayerSpec& layer,
                     const TileCapacity& caps = {});

// Keeps pillars whose representative value is >= threshold.
CprTensor PrunePillars(const CprTensor& t, double threshold,
                       RepresentativeKind kind = RepresentativeKind::kL2);

}  // namespace pillarflow

#endif  // PILLARFLOW_GSU_HPP_
