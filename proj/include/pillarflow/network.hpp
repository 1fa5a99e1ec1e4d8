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

// Layer graphs over CPR tensors: a top-down chain of strided and regular
// sparse convolutions, deconvolution branches and a channel-wise concat merge.
//
// JSON form:
//   {
//     "grid": {"height": 128, "width": 128},
//     "in_channels": 64,
//     "weight_seed": 1, "weight_range": 8,
//     "layers": [
//       {"name": "b1", "variant": "SpStConv", "C": 64, "M": 64, "stride": 2,
//        "threshold": 0, "requant_shift": 7, "input": "prev"},
//       {"name": "up1", "variant": "SpDeconv", "C": 64, "M": 32,
//        "stride": 2, "input": "b1"},
//       {"name": "cat", "variant": "Concat", "inputs": ["up1", "up2"],
//        "head": true}
//     ]
//   }
// "input" names an earlier layer, "input" (the network input) or "prev"
// (default). Layers flagged "head" are the network outputs; without any flag
// the last layer is.

#ifndef PILLARFLOW_NETWORK_HPP_
#define PILLARFLOW_NETWORK_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "pillarflow/core.hpp"
#include "pillarflow/gsu.hpp"

namespace pillarflow {

struct NetworkLayer {
  LayerSpec spec;              // unused for concat
  bool is_concat = false;
  std::vector<std::string> inputs;
  bool head = false;
};

struct NetworkSpec {
  GridDims grid;
  int32_t in_channels = 0;
  std::vector<NetworkLayer> layers;

  void Validate() const;
};

// Throws kConfigParseError on malformed input.
NetworkSpec ParseNetworkSpec(std::string_view json_text);
NetworkSpec LoadNetworkSpec(const std::string& path);
std::string NetworkSpecToJson(const NetworkSpec& net);

struct LayerReport {
  std::string name;
  std::string variant;
  OpStats stats;
  int64_t active_in = 0;
  int64_t active_out = 0;
  double density_in = 0.0;
  double density_out = 0.0;
  GridDims out_dims;
};

struct NetworkResult {
  std::vector<CprTensor> heads;
  std::vector<std::string> head_names;
  std::vector<LayerReport> layers;
  std::vector<CprTensor> outputs;  // per layer, in spec order
  std::vector<RuleSet> rules;      // per layer; empty for concat
};

// Channel-wise concatenation on the union of active sets; pillars absent from
// a part are zero-filled for that part's channels.
CprTensor ConcatUnion(const std::vector<const CprTensor*>& parts);

NetworkResult RunNetwork(const NetworkSpec& net, const CprTensor& input,
                         const TileCapacity& caps = {});

}  // namespace pillarflow

#endif  // PILLARFLOW_NETWORK_HPP_
