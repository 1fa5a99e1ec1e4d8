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

#include "pillarflow/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace pillarflow {
namespace {

using nlohmann::json;

int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

// Kernel-position groups that share one input gather.
std::vector<std::vector<int32_t>> WeightGroups(const ConvVariant& v,
                                               bool grouping) {
  const int32_t K = v.kernel_positions();
  if (v.is_strided()) {
    if (grouping) return {{0, 2, 6, 8}, {1, 7}, {3, 5}, {4}};
    std::vector<std::vector<int32_t>> g;
    for (int32_t k = 0; k < K; ++k) g.push_back({k});
    return g;
  }
  std::vector<int32_t> all(K);
  for (int32_t k = 0; k < K; ++k) all[k] = k;
  return {all};
}

// Number of maximal runs of consecutive values in a sorted unique list.
int64_t CountRuns(const std::vector<int32_t>& sorted) {
  int64_t runs = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1] + 1) ++runs;
  }
  return runs;
}

class TraceBuilder {
 public:
  TraceBuilder(const LayerSpec& layer, const RuleSet& rules,
               const TileConfig& tiles, const TraceOptions& opts,
               const HwConfig& hw)
      : layer_(layer), rules_(rules), cfg_(tiles), opts_(opts), hw_(hw) {}

  Trace Build() {
    const int32_t C = layer_.in_channels;
    const int32_t M = layer_.out_channels;
    PF_CHECK(cfg_.t_m >= 1 && cfg_.t_m <= M && cfg_.t_m <= hw_.pe_cols,
             ErrorCode::kInvalidTileConfig,
             "t_m must lie in [1, min(M, pe_cols)]");
    PF_CHECK(cfg_.t_c >= 1 && cfg_.t_c <= C && cfg_.t_c <= hw_.pe_rows,
             ErrorCode::kInvalidTileConfig,
             "t_c must lie in [1, min(C, pe_rows)]");
    PF_CHECK(cfg_.t_a >= 1 && cfg_.t_a <= hw_.buf_in,
             ErrorCode::kInvalidTileConfig, "t_a must lie in [1, buf_in]");
    PF_CHECK(opts_.output_kept.empty() ||
                 static_cast<int32_t>(opts_.output_kept.size()) ==
                     rules_.num_outputs(),
             ErrorCode::kShapeMismatch, "output_kept size != outputs");
    ganged_ = opts_.ganged_scatter && layer_.variant.is_deconv();
    // Ganged scatter drains each output-row parity separately, so a slot
    // only holds the outputs of two kernel positions.
    const int32_t cap_out =
        ganged_ ? static_cast<int32_t>(std::min<int64_t>(
                      int64_t{hw_.buf_out} * 2,
                      std::numeric_limits<int32_t>::max()))
                : hw_.buf_out;
    try {
      tiles_ = PlanTiles(rules_, cfg_.t_a, cap_out);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCapacityTooSmall) throw;
      throw Error(ErrorCode::kInvalidTileConfig, e.what());
    }
    for (const auto& t : tiles_) {
      PF_CHECK(t.rule_count() <= hw_.rule_buf, ErrorCode::kInvalidTileConfig,
               "tile rules exceed the rule buffer");
      if (ganged_) {
        for (int32_t a = 0; a < 2; ++a) {
          PF_CHECK(SliceRows(t, 2 * a) + SliceRows(t, 2 * a + 1) <= hw_.buf_out,
                   ErrorCode::kInvalidTileConfig,
                   "ganged outputs exceed the output buffer");
        }
      }
    }

    trace_.tiles = cfg_;
    trace_.num_outputs = rules_.num_outputs();
    trace_.weight_dram_bytes =
        int64_t{layer_.variant.kernel_positions()} * C * M;
    const int32_t m_tiles = static_cast<int32_t>(CeilDiv(M, cfg_.t_m));
    const int32_t c_tiles = static_cast<int32_t>(CeilDiv(C, cfg_.t_c));
    const auto groups = WeightGroups(layer_.variant, opts_.weight_grouping);

    for (int32_t ti = 0; ti < static_cast<int32_t>(tiles_.size()); ++ti) {
      const TileDescriptor& t = tiles_[ti];
      Instruction rg{InstrKind::kRuleGen};
      rg.tile = ti;
      rg.rows = t.input_count();
      rg.elements = t.rule_count();
      trace_.instrs.push_back(rg);
      for (int32_t mt = 0; mt < m_tiles; ++mt) {
        const int32_t tm = std::min(cfg_.t_m, M - mt * cfg_.t_m);
        if (ganged_) {
          EmitGanged(ti, mt, tm, c_tiles);
        } else {
          EmitOutputStationary(ti, mt, tm, c_tiles, groups);
        }
      }
    }
    return std::move(trace_);
  }

 private:
  int32_t ChannelWidth(int32_t ct) const {
    return std::min(cfg_.t_c, layer_.in_channels - ct * cfg_.t_c);
  }

  int64_t SliceRows(const TileDescriptor& t, int32_t k) const {
    return t.rule_slices[k].second - t.rule_slices[k].first;
  }

  void EmitGather(int32_t ti, int32_t mt, int32_t ct,
                  const std::vector<int32_t>& ks) {
    const TileDescriptor& t = tiles_[ti];
    int32_t mask = 0;
    for (int32_t k : ks) mask |= 1 << k;
    auto [it, inserted] = gather_memo_.try_emplace({ti, mask});
    if (inserted) {
      std::vector<int32_t> inputs;
      for (int32_t k : ks) {
        const auto& b = rules_.buffers[k];
        for (int64_t r = t.rule_slices[k].first; r < t.rule_slices[k].second;
             ++r)
          inputs.push_back(b[r].input);
      }
      std::sort(inputs.begin(), inputs.end());
      inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
      it->second = {static_cast<int64_t>(inputs.size()), CountRuns(inputs)};
    }
    const int32_t tc = ChannelWidth(ct);
    Instruction g{InstrKind::kGatherInp};
    g.tile = ti;
    g.m_tile = mt;
    g.c_tile = ct;
    g.gather = next_gather_++;
    g.rows = it->second.first;
    g.bytes = g.rows * tc;
    g.elements = it->second.second;
    g.strided = g.elements > 1;
    g.sram_bytes = g.bytes;
    trace_.instrs.push_back(g);
  }

  void EmitWeight(int32_t ti, int32_t mt, int32_t ct, int32_t k, int32_t tm) {
    const int32_t tc = ChannelWidth(ct);
    Instruction gw{InstrKind::kGatherWgt};
    gw.tile = ti;
    gw.m_tile = mt;
    gw.c_tile = ct;
    gw.weight = k;
    gw.bytes = int64_t{tc} * tm;
    gw.sram_bytes = gw.bytes;
    trace_.instrs.push_back(gw);
    Instruction lw = gw;
    lw.kind = InstrKind::kLoadWgt;
    lw.sram_bytes = 0;
    trace_.instrs.push_back(lw);
  }

  // accumulate: psum read-modify-write in the output buffer; otherwise the
  // partial sums stay in the array accumulators across channel tiles.
  void EmitMxu(int32_t ti, int32_t mt, int32_t ct, int32_t k, int32_t tm,
               int32_t out_seq, bool accumulate) {
    const int32_t tc = ChannelWidth(ct);
    Instruction mx{InstrKind::kMxu};
    mx.tile = ti;
    mx.m_tile = mt;
    mx.c_tile = ct;
    mx.weight = k;
    mx.gather = next_gather_ - 1;
    mx.out_seq = out_seq;
    mx.rows = SliceRows(tiles_[ti], k);
    mx.bytes = mx.rows * tc;
    mx.sram_bytes = mx.rows * tc + (accumulate ? mx.rows * tm * 8 : 0);
    trace_.macs += mx.rows * tc * tm;
    if (accumulate) trace_.rmw_ops += mx.rows;
    trace_.instrs.push_back(mx);
  }

  void EmitScatter(int32_t ti, int32_t mt, int32_t tm, int32_t out_seq,
                   std::vector<int32_t> outputs, bool from_psum_buffer) {
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
    if (!opts_.output_kept.empty()) {
      std::erase_if(outputs,
                    [&](int32_t o) { return opts_.output_kept[o] == 0; });
    }
    Instruction sc{InstrKind::kScatterOut};
    sc.tile = ti;
    sc.m_tile = mt;
    sc.out_seq = out_seq;
    sc.rows = static_cast<int64_t>(outputs.size());
    sc.bytes = sc.rows * tm;
    // Pruned outputs are compacted, so only position interleaving breaks a
    // write stream into runs.
    sc.elements = from_psum_buffer ? (sc.rows > 0 ? 1 : 0) : CountRuns(outputs);
    sc.strided = sc.elements > 1;
    sc.sram_bytes = from_psum_buffer ? sc.rows * tm * 4 : sc.rows * tm * 4 * 2;
    trace_.instrs.push_back(sc);
  }

  void EmitOutputStationary(int32_t ti, int32_t mt, int32_t tm,
                            int32_t c_tiles,
                            const std::vector<std::vector<int32_t>>& groups) {
    const TileDescriptor& t = tiles_[ti];
    const int32_t seq = next_out_seq_++;
    for (int32_t ct = 0; ct < c_tiles; ++ct) {
      for (const auto& g : groups) {
        bool gathered = false;
        for (int32_t k : g) {
          if (SliceRows(t, k) == 0) continue;
          EmitWeight(ti, mt, ct, k, tm);
          if (!gathered) {
            EmitGather(ti, mt, ct, g);
            gathered = true;
          }
          EmitMxu(ti, mt, ct, k, tm, seq, /*accumulate=*/true);
        }
      }
    }
    if (t.carried_outputs() > 0) {
      Instruction cp{InstrKind::kCopyPsum};
      cp.tile = ti;
      cp.m_tile = mt;
      cp.out_seq = seq;
      cp.rows = t.carried_outputs();
      cp.bytes = cp.rows * tm * 4;
      cp.sram_bytes = cp.bytes * 2;
      trace_.instrs.push_back(cp);
    }
    std::vector<int32_t> outs;
    for (int32_t o = t.output_start; o < t.flush_end; ++o) outs.push_back(o);
    EmitScatter(ti, mt, tm, seq, std::move(outs), /*from_psum_buffer=*/true);
  }

  // Deconvolution: kernel positions outside, channel tiles inside; the
  // outputs of each output-row parity are complete once both of its
  // positions ran and are scattered immediately. Every output receives one
  // rule, so nothing is accumulated in the output buffer.
  void EmitGanged(int32_t ti, int32_t mt, int32_t tm, int32_t c_tiles) {
    const TileDescriptor& t = tiles_[ti];
    const std::vector<int32_t> all = {0, 1, 2, 3};
    if (c_tiles == 1) EmitGather(ti, mt, 0, all);
    for (int32_t a = 0; a < 2; ++a) {
      const int32_t seq = next_out_seq_++;
      std::vector<int32_t> outs;
      for (int32_t b = 0; b < 2; ++b) {
        const int32_t k = a * 2 + b;
        if (SliceRows(t, k) == 0) continue;
        for (int32_t ct = 0; ct < c_tiles; ++ct) {
          EmitWeight(ti, mt, ct, k, tm);
          if (c_tiles > 1) EmitGather(ti, mt, ct, {k});
          EmitMxu(ti, mt, ct, k, tm, seq, /*accumulate=*/false);
        }
        const auto& buf = rules_.buffers[k];
        for (int64_t r = t.rule_slices[k].first; r < t.rule_slices[k].second;
             ++r)
          outs.push_back(buf[r].output);
      }
      if (!outs.empty())
        EmitScatter(ti, mt, tm, seq, std::move(outs),
                    /*from_psum_buffer=*/false);
    }
  }

  const LayerSpec& layer_;
  const RuleSet& rules_;
  TileConfig cfg_;
  const TraceOptions& opts_;
  const HwConfig& hw_;
  std::vector<TileDescriptor> tiles_;
  bool ganged_ = false;
  // (tile, kernel-position mask) -> (distinct inputs, contiguous runs)
  std::map<std::pair<int32_t, int32_t>, std::pair<int64_t, int64_t>>
      gather_memo_;
  Trace trace_;
  int32_t next_gather_ = 0;
  int32_t next_out_seq_ = 0;
};

HwConfig HwFromJson(const json& j, HwConfig base) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("name", base.name);
  get("pe_rows", base.pe_rows);
  get("pe_cols", base.pe_cols);
  get("buf_in", base.buf_in);
  get("buf_out", base.buf_out);
  get("rule_buf", base.rule_buf);
  get("dram_bandwidth", base.dram_bandwidth);
  get("dram_region_bytes", base.dram_region_bytes);
  get("dram_row_overhead", base.dram_row_overhead);
  get("wgt_bus_bytes", base.wgt_bus_bytes);
  get("sram_bus_bytes", base.sram_bus_bytes);
  get("frequency_mhz", base.frequency_mhz);
  get("rgu_rules_per_cycle", base.rulegen.rgu_rules_per_cycle);
  get("rgu_pipeline_fill", base.rulegen.rgu_pipeline_fill);
  return base;
}

}  // namespace

HwConfig HwConfig::HighEnd() {
  HwConfig c;
  c.name = "HE";
  return c;
}

HwConfig HwConfig::LowEnd() {
  HwConfig c;
  c.name = "LE";
  c.pe_rows = 16;
  c.pe_cols = 16;
  c.buf_in = 4096;
  c.buf_out = 8192;
  c.rule_buf = 65536;
  c.dram_bandwidth = 16.0;
  c.dram_region_bytes = 4096;
  c.dram_row_overhead = 2;
  c.wgt_bus_bytes = 64;
  c.sram_bus_bytes = 64;
  c.frequency_mhz = 500.0;
  return c;
}

void HwConfig::Validate() const {
  PF_CHECK(pe_rows > 0 && pe_cols > 0, ErrorCode::kInvalidArgument,
           "PE array dimensions must be positive");
  PF_CHECK(buf_in > 0 && buf_out > 0 && rule_buf > 0,
           ErrorCode::kInvalidArgument, "buffer sizes must be positive");
  PF_CHECK(dram_bandwidth > 0 && dram_region_bytes > 0 &&
               dram_row_overhead >= 0,
           ErrorCode::kInvalidArgument, "invalid DRAM parameters");
  PF_CHECK(wgt_bus_bytes > 0 && sram_bus_bytes > 0,
           ErrorCode::kInvalidArgument, "bus widths must be positive");
  PF_CHECK(rulegen.rgu_rules_per_cycle > 0, ErrorCode::kInvalidArgument,
           "rgu_rules_per_cycle must be positive");
}

HwConfig ParseHwConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  }
  PF_CHECK(j.is_object(), ErrorCode::kConfigParseError,
           "hardware config must be a JSON object");
  HwConfig base = HwConfig::HighEnd();
  try {
    if (j.contains("preset")) {
      const std::string p = j.at("preset").get<std::string>();
      if (p == "LE" || p == "le") {
        base = HwConfig::LowEnd();
      } else {
        PF_CHECK(p == "HE" || p == "he", ErrorCode::kConfigParseError,
                 "unknown preset '" + p + "'");
      }
    }
    HwConfig cfg = HwFromJson(j, base);
    cfg.Validate();
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  }
}

HwConfig LoadHwConfig(const std::string& preset_or_path) {
  if (preset_or_path == "HE" || preset_or_path == "he") return HwConfig::HighEnd();
  if (preset_or_path == "LE" || preset_or_path == "le") return HwConfig::LowEnd();
  std::ifstream in(preset_or_path);
  PF_CHECK(in.good(), ErrorCode::kIoError,
           "cannot open hardware config '" + preset_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseHwConfig(ss.str());
}

int64_t DramCycles(int64_t bytes, AccessPattern pattern, int64_t elements,
                   const HwConfig& cfg) {
  PF_CHECK(bytes >= 0 && elements >= 0, ErrorCode::kInvalidArgument,
           "negative transfer size");
  if (bytes == 0) return 0;
  const int64_t transfer =
      static_cast<int64_t>(std::ceil(static_cast<double>(bytes) /
                                     cfg.dram_bandwidth));
  const int64_t switches = pattern == AccessPattern::kContiguous
                               ? CeilDiv(bytes, cfg.dram_region_bytes)
                               : std::max<int64_t>(1, elements);
  return transfer + cfg.dram_row_overhead * switches;
}

const char* InstrKindName(InstrKind kind) {
  switch (kind) {
    case InstrKind::kRuleGen: return "RuleGen";
    case InstrKind::kGatherInp: return "GatherInp";
    case InstrKind::kGatherWgt: return "GatherWgt";
    case InstrKind::kLoadWgt: return "LoadWgt";
    case InstrKind::kMxu: return "Mxu";
    case InstrKind::kCopyPsum: return "CopyPsum";
    case InstrKind::kScatterOut: return "ScatterOut";
  }
  return "?";
}

Trace EmitTrace(const LayerSpec& layer, const RuleSet& rules,
                const TileConfig& tiles, const TraceOptions& opts,
                const HwConfig& hw) {
  hw.Validate();
  PF_CHECK(layer.variant.kernel_positions() ==
               static_cast<int>(rules.buffers.size()),
           ErrorCode::kShapeMismatch, "rule set does not match the layer");
  return TraceBuilder(layer, rules, tiles, opts, hw).Build();
}

SimStats SimulateTrace(const Trace& trace, const HwConfig& hw,
                       std::vector<int64_t>* start_cycles) {
  hw.Validate();
  if (start_cycles) start_cycles->clear();
  auto record = [&](int64_t cycle) {
    if (start_cycles) start_cycles->push_back(cycle);
  };
  SimStats st;
  st.dram_read_bytes = trace.weight_dram_bytes;
  st.rmw_ops = trace.rmw_ops;

  auto idx = [](InstrKind k) { return static_cast<int>(k); };
  int64_t rgu_free = 0, dma_in_free = 0, dma_out_free = 0, mxu_free = 0;
  std::map<int32_t, int64_t> rg_end;          // tile -> RuleGen end
  std::map<int32_t, int64_t> tile_last_mxu;   // tile -> last Mxu end
  std::map<int32_t, int64_t> gather_end;      // gather -> end
  std::map<int32_t, bool> gather_waited_rg;   // gather bound by RuleGen
  std::map<int32_t, int64_t> gather_last_use; // gather -> last consumer end
  std::map<int32_t, int64_t> scatter_end;     // out_seq -> scatter end
  bool pending_fill = true;

  auto slot_free = [](const std::map<int32_t, int64_t>& m, int32_t id) {
    auto it = m.find(id);
    return it == m.end() ? int64_t{0} : it->second;
  };

  for (const Instruction& in : trace.instrs) {
    const int ki = idx(in.kind);
    ++st.instr_count[ki];
    st.sram_bytes += in.sram_bytes;
    switch (in.kind) {
      case InstrKind::kRuleGen: {
        const int64_t cyc = RguCycles(in.rows, in.elements, hw.rulegen);
        const int64_t start =
            std::max(rgu_free, slot_free(tile_last_mxu, in.tile - 2));
        record(start);
        rgu_free = start + cyc;
        rg_end[in.tile] = rgu_free;
        st.busy_cycles[ki] += cyc;
        break;
      }
      case InstrKind::kGatherInp: {
        const int64_t cyc = DramCycles(
            in.bytes,
            in.strided ? AccessPattern::kStrided : AccessPattern::kContiguous,
            in.elements, hw);
        const int64_t rg = slot_free(rg_end, in.tile);
        const int64_t start =
            std::max({dma_in_free, rg, slot_free(gather_last_use, in.gather - 2)});
        gather_waited_rg[in.gather] = rg == start && rg > 0;
        record(start);
        dma_in_free = start + cyc;
        gather_end[in.gather] = dma_in_free;
        st.busy_cycles[ki] += cyc;
        st.dram_read_bytes += in.bytes;
        st.gather_pillars += in.rows;
        break;
      }
      case InstrKind::kGatherWgt:
      case InstrKind::kLoadWgt:
      case InstrKind::kCopyPsum: {
        int64_t cyc = 0;
        if (in.kind == InstrKind::kGatherWgt) {
          cyc = CeilDiv(in.bytes, hw.wgt_bus_bytes);
        } else if (in.kind == InstrKind::kLoadWgt) {
          cyc = hw.pe_rows;
          pending_fill = true;
        } else {
          cyc = CeilDiv(in.bytes, hw.sram_bus_bytes);
          st.psum_copies += in.rows;
        }
        record(mxu_free);
        mxu_free += cyc;
        st.busy_cycles[ki] += cyc;
        st.stall_cycles[ki] += cyc;
        break;
      }
      case InstrKind::kMxu: {
        const int64_t g_ready =
            in.gather >= 0 ? slot_free(gather_end, in.gather) : 0;
        const int64_t o_ready = slot_free(scatter_end, in.out_seq - 2);
        const int64_t ready = std::max({mxu_free, g_ready, o_ready});
        if (ready > mxu_free) {
          InstrKind blame = InstrKind::kScatterOut;
          if (g_ready >= o_ready) {
            blame = gather_waited_rg[in.gather] ? InstrKind::kRuleGen
                                                : InstrKind::kGatherInp;
          }
          st.stall_cycles[idx(blame)] += ready - mxu_free;
        }
        int64_t start = ready;
        record(start);
        if (pending_fill) {
          st.stall_cycles[ki] += hw.fill_cycles();
          start += hw.fill_cycles();
          pending_fill = false;
        }
        mxu_free = start + in.rows;
        st.busy_cycles[ki] += in.rows;
        st.mxu_busy_cycles += in.rows;
        if (in.gather >= 0) gather_last_use[in.gather] = mxu_free;
        tile_last_mxu[in.tile] = mxu_free;
        break;
      }
      case InstrKind::kScatterOut: {
        const int64_t cyc = DramCycles(
            in.bytes,
            in.strided ? AccessPattern::kStrided : AccessPattern::kContiguous,
            in.elements, hw);
        const int64_t start = std::max(dma_out_free, mxu_free);
        record(start);
        dma_out_free = start + cyc;
        scatter_end[in.out_seq] = dma_out_free;
        st.busy_cycles[ki] += cyc;
        st.dram_write_bytes += in.bytes;
        st.scatter_outputs += in.rows;
        break;
      }
    }
  }
  st.macs = trace.macs;
  st.total_cycles = std::max({mxu_free, dma_out_free, dma_in_free, rgu_free});
  // Work left after the last MXU operation is exposed tail time.
  st.stall_cycles[idx(InstrKind::kScatterOut)] += st.total_cycles - mxu_free;
  return st;
}

EnergyBreakdown ComputeEnergy(const SimStats& stats, const EnergyConfig& cfg) {
  EnergyBreakdown e;
  e.compute = static_cast<double>(stats.macs) * cfg.e_mac;
  e.sram = static_cast<double>(stats.sram_bytes) * cfg.e_sram;
  e.dram = static_cast<double>(stats.dram_read_bytes + stats.dram_write_bytes) *
           cfg.e_dram;
  return e;
}

std::vector<TileConfig> CandidateTileConfigs(const LayerSpec& layer,
                                             const RuleSet& rules,
                                             const HwConfig& hw) {
  auto widths = [](int32_t channels, int32_t pe) {
    std::vector<int32_t> w;
    for (int32_t v = std::min(channels, pe); v >= 1 && w.size() < 3; v /= 2)
      w.push_back(v);
    return w;
  };
  const TileCapacity minimal = MinimalCapacities(rules);
  const int32_t max_a = std::max(1, std::min(hw.buf_in, rules.num_inputs));
  std::vector<int32_t> as;
  for (int32_t a = 64; a < max_a; a *= 2) as.push_back(a);
  as.push_back(max_a);
  std::vector<TileConfig> out;
  for (int32_t tm : widths(layer.out_channels, hw.pe_cols)) {
    for (int32_t tc : widths(layer.in_channels, hw.pe_rows)) {
      for (int32_t ta : as) {
        if (ta < minimal.cap_in) continue;
        out.push_back({tm, tc, ta});
      }
    }
  }
  return out;
}

TileConfig OptimizeTiles(const LayerSpec& layer, const RuleSet& rules,
                         const HwConfig& hw, const TraceOptions& opts) {
  TileConfig best;
  int64_t best_cycles = std::numeric_limits<int64_t>::max();
  auto better = [](const TileConfig& a, const TileConfig& b) {
    if (a.t_a != b.t_a) return a.t_a > b.t_a;
    if (a.t_m != b.t_m) return a.t_m > b.t_m;
    return a.t_c > b.t_c;
  };
  for (const TileConfig& cand : CandidateTileConfigs(layer, rules, hw)) {
    int64_t cycles = 0;
    try {
      cycles = SimulateTrace(EmitTrace(layer, rules, cand, opts, hw), hw)
                   .total_cycles;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidTileConfig) throw;
      continue;
    }
    if (cycles < best_cycles || (cycles == best_cycles && better(cand, best))) {
      best = cand;
      best_cycles = cycles;
    }
  }
  PF_CHECK(best_cycles != std::numeric_limits<int64_t>::max(),
           ErrorCode::kInvalidTileConfig,
           "no feasible tile configuration for this layer");
  return best;
}

CacheBaselineResult CacheBaselineInputTraffic(const RuleSet& rules,
                                              int32_t channels,
                                              int32_t out_window,
                                              const HwConfig& hw,
                                              int64_t cache_bytes,
                                              int64_t block_bytes) {
  PF_CHECK(channels > 0 && out_window > 0 && block_bytes > 0 &&
               cache_bytes >= block_bytes,
           ErrorCode::kInvalidArgument, "invalid cache baseline parameters");
  // Inputs contributing to each output, in kernel-position order.
  std::vector<std::vector<int32_t>> per_output(rules.num_outputs());
  for (const auto& buf : rules.buffers) {
    for (const RulePair& r : buf) per_output[r.output].push_back(r.input);
  }
  const int64_t lines = cache_bytes / block_bytes;
  std::vector<int64_t> tag(lines, -1);
  CacheBaselineResult res;
  for (int32_t w0 = 0; w0 < rules.num_outputs(); w0 += out_window) {
    const int32_t w1 = std::min(rules.num_outputs(), w0 + out_window);
    for (int32_t o = w0; o < w1; ++o) {
      for (int32_t input : per_output[o]) {
        const int64_t first = int64_t{input} * channels / block_bytes;
        const int64_t last =
            (int64_t{input} * channels + channels - 1) / block_bytes;
        for (int64_t blk = first; blk <= last; ++blk) {
          ++res.accesses;
          int64_t& t = tag[blk % lines];
          if (t != blk) {
            t = blk;
            ++res.misses;
            res.dram_cycles +=
                DramCycles(block_bytes, AccessPattern::kStrided, 1, hw);
          }
        }
      }
    }
  }
  res.dram_bytes = res.misses * block_bytes;
  return res;
}

}  // namespace pillarflow
