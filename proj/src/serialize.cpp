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

#include "pillarflow/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace pillarflow {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr char kMagic[8] = {'P', 'F', 'C', 'P', 'R', '0', '0', '1'};

class Writer {
 public:
  void Bytes(const void* p, size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void I32(int32_t v) { Le(static_cast<uint32_t>(v), 4); }
  void I64(int64_t v) { Le(static_cast<uint64_t>(v), 8); }
  std::string Take() { return std::move(out_); }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  void Need(size_t n) const {
    PF_CHECK(in_.size() - pos_ >= n, ErrorCode::kIoError,
             "truncated CPR buffer");
  }
  uint8_t U8() {
    Need(1);
    return static_cast<uint8_t>(in_[pos_++]);
  }
  int32_t I32() { return static_cast<int32_t>(Le(4)); }
  int64_t I64() { return static_cast<int64_t>(Le(8)); }
  std::string_view Bytes(size_t n) {
    Need(n);
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  uint64_t Le(int n) {
    Need(static_cast<size_t>(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= uint64_t{static_cast<uint8_t>(in_[pos_++])} << (8 * i);
    return v;
  }
  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCpr(const CprTensor& t) {
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.I32(t.dims().height);
  w.I32(t.dims().width);
  w.I32(t.channels());
  w.U8(static_cast<uint8_t>(t.precision()));
  w.U8(0);
  w.U8(0);
  w.U8(0);
  w.I64(t.pillar_count());
  for (int32_t v : t.coords().row_starts) w.I32(v);
  for (int32_t v : t.coords().col_indices) w.I32(v);
  for (int32_t v : t.features()) {
    if (t.precision() == Precision::kInt8) {
      w.U8(static_cast<uint8_t>(static_cast<int8_t>(v)));
    } else {
      w.I32(v);
    }
  }
  return w.Take();
}

CprTensor DeserializeCpr(std::string_view bytes) {
  Reader r(bytes);
  PF_CHECK(std::memcmp(r.Bytes(sizeof(kMagic)).data(), kMagic,
                       sizeof(kMagic)) == 0,
           ErrorCode::kIoError, "bad CPR magic");
  GridDims dims{r.I32(), r.I32()};
  const int32_t channels = r.I32();
  const uint8_t prec = r.U8();
  r.Bytes(3);
  const int64_t count = r.I64();
  PF_CHECK(dims.height >= 0 && dims.width >= 0 && channels >= 0 &&
               count >= 0 && count <= dims.cells(),
           ErrorCode::kIoError, "bad CPR header");
  PF_CHECK(prec <= 1, ErrorCode::kIoError, "bad CPR precision tag");
  const Precision precision = static_cast<Precision>(prec);
  const size_t feat_bytes = precision == Precision::kInt8 ? 1 : 4;
  r.Need((static_cast<size_t>(dims.height) + 1 + count) * 4 +
         static_cast<size_t>(count) * channels * feat_bytes);

  CprCoords coords(dims);
  for (auto& v : coords.row_starts) v = r.I32();
  coords.col_indices.resize(static_cast<size_t>(count));
  for (auto& v : coords.col_indices) v = r.I32();
  std::vector<int32_t> features(static_cast<size_t>(count) * channels);
  for (auto& v : features) {
    v = precision == Precision::kInt8 ? int32_t{static_cast<int8_t>(r.U8())}
                                      : r.I32();
  }
  PF_CHECK(r.done(), ErrorCode::kIoError, "trailing bytes after CPR tensor");
  CprTensor t(std::move(coords), channels, precision, std::move(features));
  t.Validate();
  return t;
}

void SaveCpr(const std::string& path, const CprTensor& t) {
  std::ofstream out(path, std::ios::binary);
  PF_CHECK(out.good(), ErrorCode::kIoError, "cannot write '" + path + "'");
  const std::string bytes = SerializeCpr(t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  PF_CHECK(out.good(), ErrorCode::kIoError, "write failed for '" + path + "'");
}

CprTensor LoadCpr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  PF_CHECK(in.good(), ErrorCode::kIoError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return DeserializeCpr(ss.str());
}

ordered_json CoordsToJson(const CprCoords& coords) {
  ordered_json list = ordered_json::array();
  for (const Coord& c : coords.ToList()) list.push_back({c.row, c.col});
  return list;
}

ordered_json TensorToJson(const CprTensor& t) {
  ordered_json j;
  j["grid"] = {t.dims().height, t.dims().width};
  j["channels"] = t.channels();
  j["precision"] = t.precision() == Precision::kInt8 ? "int8" : "int32";
  j["coords"] = CoordsToJson(t.coords());
  j["features"] = t.features();
  return j;
}

CprTensor TensorFromJson(const json& j) {
  try {
    const auto grid = j.at("grid").get<std::vector<int32_t>>();
    PF_CHECK(grid.size() == 2, ErrorCode::kConfigParseError,
             "grid must be [height, width]");
    const int32_t channels = j.at("channels").get<int32_t>();
    const std::string prec = j.value("precision", std::string("int8"));
    PF_CHECK(prec == "int8" || prec == "int32", ErrorCode::kConfigParseError,
             "precision must be int8 or int32");
    std::vector<Coord> coords;
    for (const auto& c : j.at("coords")) {
      const auto rc = c.get<std::vector<int32_t>>();
      PF_CHECK(rc.size() == 2, ErrorCode::kConfigParseError,
               "coordinates must be [row, col]");
      coords.push_back({rc[0], rc[1]});
    }
    std::vector<int32_t> features;
    if (j.contains("features")) {
      features = j.at("features").get<std::vector<int32_t>>();
    } else {
      features.assign(coords.size() * static_cast<size_t>(channels), 0);
    }
    return BuildCpr(coords, features, {grid[0], grid[1]}, channels,
                    prec == "int8" ? Precision::kInt8 : Precision::kInt32);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  }
}

ordered_json RuleSetToJson(const RuleSet& rules) {
  ordered_json j;
  j["variant"] = std::string(rules.variant.name());
  j["in_grid"] = {rules.in_dims.height, rules.in_dims.width};
  j["num_inputs"] = rules.num_inputs;
  j["out_coords"] = CoordsToJson(rules.out_coords);
  ordered_json bufs = ordered_json::array();
  for (size_t k = 0; k < rules.buffers.size(); ++k) {
    ordered_json pairs = ordered_json::array();
    for (const RulePair& r : rules.buffers[k]) pairs.push_back({r.input, r.output});
    bufs.push_back({{"weight_pos", k}, {"rules", std::move(pairs)}});
  }
  j["buffers"] = std::move(bufs);
  return j;
}

ordered_json OpStatsToJson(const OpStats& s) {
  ordered_json j;
  j["macs_performed"] = s.macs_performed;
  j["dense_macs_equivalent"] = s.dense_macs_equivalent;
  j["ops_savings"] = s.ops_savings();
  j["pillars_in"] = s.pillars_in;
  j["pillars_out"] = s.pillars_out;
  j["pillars_pruned"] = s.pillars_pruned;
  j["rules"] = s.rules;
  j["tiles"] = s.tiles;
  j["psum_carried"] = s.psum_carried;
  j["gather_records"] = s.gather_records;
  j["max_gathers_per_input"] = s.max_gathers_per_input;
  j["bytes_gathered"] = s.bytes_gathered;
  j["bytes_scattered"] = s.bytes_scattered;
  return j;
}

ordered_json HwConfigToJson(const HwConfig& hw) {
  ordered_json j;
  j["name"] = hw.name;
  j["pe_rows"] = hw.pe_rows;
  j["pe_cols"] = hw.pe_cols;
  j["buf_in"] = hw.buf_in;
  j["buf_out"] = hw.buf_out;
  j["rule_buf"] = hw.rule_buf;
  j["dram_bandwidth"] = hw.dram_bandwidth;
  j["dram_region_bytes"] = hw.dram_region_bytes;
  j["dram_row_overhead"] = hw.dram_row_overhead;
  j["wgt_bus_bytes"] = hw.wgt_bus_bytes;
  j["sram_bus_bytes"] = hw.sram_bus_bytes;
  j["frequency_mhz"] = hw.frequency_mhz;
  j["rgu_rules_per_cycle"] = hw.rulegen.rgu_rules_per_cycle;
  j["rgu_pipeline_fill"] = hw.rulegen.rgu_pipeline_fill;
  return j;
}

ordered_json SimStatsToJson(const SimStats& s, const EnergyConfig& energy) {
  ordered_json j;
  j["total_cycles"] = s.total_cycles;
  j["mxu_busy_cycles"] = s.mxu_busy_cycles;
  j["utilization"] = s.utilization();
  j["stall_share"] = s.stall_share();
  ordered_json busy, stall, count;
  for (int k = 0; k < kNumInstrKinds; ++k) {
    const char* name = InstrKindName(static_cast<InstrKind>(k));
    busy[name] = s.busy_cycles[k];
    stall[name] = s.stall_cycles[k];
    count[name] = s.instr_count[k];
  }
  j["busy_cycles"] = std::move(busy);
  j["stall_cycles"] = std::move(stall);
  j["instr_count"] = std::move(count);
  j["macs"] = s.macs;
  j["dram_read_bytes"] = s.dram_read_bytes;
  j["dram_write_bytes"] = s.dram_write_bytes;
  j["sram_bytes"] = s.sram_bytes;
  j["gather_pillars"] = s.gather_pillars;
  j["scatter_outputs"] = s.scatter_outputs;
  j["psum_copies"] = s.psum_copies;
  j["rmw_ops"] = s.rmw_ops;
  const EnergyBreakdown e = ComputeEnergy(s, energy);
  j["energy"] = {{"compute", e.compute},
                 {"sram", e.sram},
                 {"dram", e.dram},
                 {"total", e.total()}};
  return j;
}

std::string TraceToCsv(const Trace& trace, const HwConfig& hw) {
  std::vector<int64_t> starts;
  SimulateTrace(trace, hw, &starts);
  std::ostringstream out;
  out << "cycle,kind,tile,m_tile,c_tile,weight,rows,bytes\n";
  for (size_t i = 0; i < trace.instrs.size(); ++i) {
    const Instruction& in = trace.instrs[i];
    out << starts[i] << ',' << InstrKindName(in.kind) << ',' << in.tile << ','
        << in.m_tile << ',' << in.c_tile << ',' << in.weight << ',' << in.rows
        << ',' << in.bytes << '\n';
  }
  return out.str();
}

}  // namespace pillarflow
