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

// Cycle model of the sparse-convolution dataflow.
//
// A layer is lowered to a trace over seven instruction kinds. The loop nest
// is output-stationary outside (active-pillar tiles x output-channel tiles)
// and weight-stationary inside (input-channel tiles x kernel positions):
//
//   for a-tile t:                       RuleGen(t)
//     for m-tile:
//       for c-tile:
//         for weight group g:           GatherInp(t, c, g)
//           for k in g:                 GatherWgt, LoadWgt, Mxu(rows = rules)
//       CopyPsum(boundary outputs)      if the next tile shares outputs
//       ScatterOut(finalized outputs)
//
// Weight grouping (stride 2) orders kernel positions by input parity class so
// one gather feeds every position of the class. Ganged scatter
// (deconvolution) swaps the inner loops to kernel position outside, channel
// tile inside, and scatters each position's outputs as soon as they are done.
//
// Timing rules:
//   * MXU busy = rows per Mxu. The first Mxu after a LoadWgt (or the first
//     Mxu of the trace) pays the systolic fill pe_rows + pe_cols.
//   * GatherWgt, LoadWgt and CopyPsum run on the MXU timeline (stalls).
//   * RuleGen, GatherInp and ScatterOut run on their own engines and overlap
//     with the MXU through double buffers (2 rule, 2 input, 2 output slots);
//     only a producer the MXU actually waits on shows up as stall.
//   * Layer weights are prefetched into the global buffer while the previous
//     layer runs: counted as DRAM traffic, not as cycles.

#ifndef PILLARFLOW_SIM_HPP_
#define PILLARFLOW_SIM_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pillarflow/gsu.hpp"
#include "pillarflow/rulegen.hpp"

namespace pillarflow {

struct HwConfig {
  std::string name = "custom";
  int32_t pe_rows = 64;
  int32_t pe_cols = 64;
  int32_t buf_in = 8192;      // input buffer entries (pillars)
  int32_t buf_out = 16384;    // output buffer entries (pillars)
  int32_t rule_buf = 262144;  // rule buffer entries
  double dram_bandwidth = 64.0;       // bytes / cycle
  int64_t dram_region_bytes = 16384;  // bytes streamed per region (page group)
  int64_t dram_row_overhead = 2;      // cycles per region switch
  int64_t wgt_bus_bytes = 256;        // global buffer -> PE weight path
  int64_t sram_bus_bytes = 256;       // output buffer copy path
  double frequency_mhz = 1000.0;      // informational
  RuleGenCostConfig rulegen;

  static HwConfig HighEnd();  // 64 x 64 PE array
  static HwConfig LowEnd();   // 16 x 16 PE array
  void Validate() const;
  int64_t fill_cycles() const { return int64_t{pe_rows} + pe_cols; }
};

HwConfig LoadHwConfig(const std::string& preset_or_path);
HwConfig ParseHwConfig(const std::string& json_text);

enum class AccessPattern { kContiguous, kStrided };

// ceil(bytes / bandwidth) + row_overhead * region switches. A contiguous
// stream switches region every dram_region_bytes; a strided access switches
// once per element.
int64_t DramCycles(int64_t bytes, AccessPattern pattern, int64_t elements,
                   const HwConfig& cfg);

enum class InstrKind : int {
  kRuleGen = 0,
  kGatherInp,
  kGatherWgt,
  kLoadWgt,
  kMxu,
  kCopyPsum,
  kScatterOut,
};
inline constexpr int kNumInstrKinds = 7;
const char* InstrKindName(InstrKind kind);

struct Instruction {
  InstrKind kind = InstrKind::kMxu;
  int32_t tile = 0;
  int32_t m_tile = 0;
  int32_t c_tile = 0;
  int32_t weight = -1;
  int32_t gather = -1;   // GatherInp id (GatherInp: own id; Mxu: consumed id)
  int32_t out_seq = -1;  // output buffer generation written (Mxu / ScatterOut)
  int64_t rows = 0;      // Mxu rows, pillars gathered, outputs scattered
  int64_t bytes = 0;
  int64_t elements = 0;  // RuleGen: rules; DRAM ops: contiguous runs
  bool strided = false;  // DRAM access pattern (more than one run)
  int64_t sram_bytes = 0;  // on-chip buffer traffic of this instruction
};

struct TileConfig {
  int32_t t_m = 0;
  int32_t t_c = 0;
  int32_t t_a = 0;
  friend bool operator==(const TileConfig&, const TileConfig&) = default;
};

struct TraceOptions {
  bool weight_grouping = false;
  bool ganged_scatter = false;
  // Optional per-output survival mask (pruning); empty keeps everything.
  std::vector<uint8_t> output_kept;
};

struct Trace {
  std::vector<Instruction> instrs;
  TileConfig tiles;
  int64_t macs = 0;
  int64_t rmw_ops = 0;            // scatter-accumulate into the output buffer
  int64_t weight_dram_bytes = 0;  // one fetch of the layer's weights
  int32_t num_outputs = 0;
};

// Throws kInvalidTileConfig for tile sizes the hardware cannot run.
Trace EmitTrace(const LayerSpec& layer, const RuleSet& rules,
                const TileConfig& tiles, const TraceOptions& opts,
                const HwConfig& hw);

struct EnergyConfig {
  double e_mac = 1.0;    // per int8 MAC
  double e_sram = 6.0;   // per SRAM byte
  double e_dram = 200.0; // per DRAM byte
};

struct EnergyBreakdown {
  double compute = 0.0;
  double sram = 0.0;
  double dram = 0.0;
  double total() const { return compute + sram + dram; }
};

struct SimStats {
  int64_t total_cycles = 0;
  std::array<int64_t, kNumInstrKinds> busy_cycles{};   // engine time per kind
  std::array<int64_t, kNumInstrKinds> stall_cycles{};  // MXU idle blamed on kind
  std::array<int64_t, kNumInstrKinds> instr_count{};
  int64_t mxu_busy_cycles = 0;
  int64_t macs = 0;
  int64_t dram_read_bytes = 0;
  int64_t dram_write_bytes = 0;
  int64_t sram_bytes = 0;
  int64_t gather_pillars = 0;
  int64_t scatter_outputs = 0;
  int64_t psum_copies = 0;
  int64_t rmw_ops = 0;

  double utilization() const {
    return total_cycles == 0 ? 0.0
                             : static_cast<double>(mxu_busy_cycles) /
                                   static_cast<double>(total_cycles);
  }
  int64_t stall_total() const { return total_cycles - mxu_busy_cycles; }
  double stall_share() const {
    return total_cycles == 0 ? 0.0
                             : static_cast<double>(stall_total()) /
                                   static_cast<double>(total_cycles);
  }
};

// `start_cycles`, when given, receives the issue cycle of every instruction.
SimStats SimulateTrace(const Trace& trace, const HwConfig& hw,
                       std::vector<int64_t>* start_cycles = nullptr);

EnergyBreakdown ComputeEnergy(const SimStats& stats, const EnergyConfig& cfg = {});

// Exhaustive search over a candidate grid of (t_m, t_c, t_a); minimizes
// simulated cycles, ties broken toward larger t_a, then larger t_m, t_c.
TileConfig OptimizeTiles(const LayerSpec& layer, const RuleSet& rules,
                         const HwConfig& hw, const TraceOptions& opts = {});

// Feasible tile configurations the optimizer considers.
std::vector<TileConfig> CandidateTileConfigs(const LayerSpec& layer,
                                             const RuleSet& rules,
                                             const HwConfig& hw);

// Input-fetch DRAM bytes of a hash + direct-mapped-cache baseline: outputs
// are processed in buffer-sized windows, each output's inputs are looked up
// in brute-force rule order through a cache of `cache_bytes` with
// `block_bytes` lines.
struct CacheBaselineResult {
  int64_t accesses = 0;
  int64_t misses = 0;
  int64_t dram_bytes = 0;
  int64_t dram_cycles = 0;
};
CacheBaselineResult CacheBaselineInputTraffic(const RuleSet& rules,
                                              int32_t channels,
                                              int32_t out_window,
                                              const HwConfig& hw,
                                              int64_t cache_bytes = 32768,
                                              int64_t block_bytes = 64);

}  // namespace pillarflow

#endif  // PILLARFLOW_SIM_HPP_
