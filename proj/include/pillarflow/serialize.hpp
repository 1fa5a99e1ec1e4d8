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

// Binary and JSON encodings of tensors, rule sets and statistics.
//
// CPR binary layout (all integers little-endian):
//   bytes 0-7   magic "PFCPR001"
//   int32       height, width, channels
//   uint8       precision (0 = int8, 1 = int32), 3 bytes padding
//   int64       pillar count P
//   int32[H+1]  row_starts
//   int32[P]    col_indices
//   P*C         features, int8 or int32 per precision

#ifndef PILLARFLOW_SERIALIZE_HPP_
#define PILLARFLOW_SERIALIZE_HPP_

#include <string>
#include <string_view>

#include "json.hpp"
#include "pillarflow/core.hpp"
#include "pillarflow/gsu.hpp"
#include "pillarflow/rulegen.hpp"
#include "pillarflow/sim.hpp"

namespace pillarflow {

std::string SerializeCpr(const CprTensor& t);
// Throws kIoError on malformed bytes and kInvariantViolation on a
// well-formed buffer that breaks the CPR invariants.
CprTensor DeserializeCpr(std::string_view bytes);

void SaveCpr(const std::string& path, const CprTensor& t);
CprTensor LoadCpr(const std::string& path);

nlohmann::ordered_json CoordsToJson(const CprCoords& coords);
nlohmann::ordered_json TensorToJson(const CprTensor& t);
CprTensor TensorFromJson(const nlohmann::json& j);
nlohmann::ordered_json RuleSetToJson(const RuleSet& rules);
nlohmann::ordered_json OpStatsToJson(const OpStats& stats);
nlohmann::ordered_json HwConfigToJson(const HwConfig& hw);
nlohmann::ordered_json SimStatsToJson(const SimStats& stats,
                                      const EnergyConfig& energy = {});

// One line per instruction: cycle,kind,tile,m_tile,c_tile,weight,rows,bytes.
std::string TraceToCsv(const Trace& trace, const HwConfig& hw);

}  // namespace pillarflow

#endif  // PILLARFLOW_SERIALIZE_HPP_
