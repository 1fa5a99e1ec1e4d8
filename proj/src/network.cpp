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

#include "pillarflow/network.hpp"

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

namespace pillarflow {

using nlohmann::json;

namespace {

WeightKernel SyntheticWeights(uint64_t seed, int k, int c, int m, int range) {
  WeightKernel w(k, c, m);
  std::mt19937_64 rng(seed);
  const uint64_t span = static_cast<uint64_t>(2 * range + 1);
  for (auto& v : w.values) {
    v = static_cast<int8_t>(static_cast<int>(rng() % span) - range);
  }
  return w;
}

RepresentativeKind ParseRepresentative(const std::string& s) {
  if (s == "L2") return RepresentativeKind::kL2;
  if (s == "L1") return RepresentativeKind::kL1;
  if (s == "MaxAbs") return RepresentativeKind::kMaxAbs;
  throw Error(ErrorCode::kConfigParseError, "unknown representative '" + s + "'");
}

const char* RepresentativeName(RepresentativeKind k) {
  switch (k) {
    case RepresentativeKind::kL2: return "L2";
    case RepresentativeKind::kL1: return "L1";
    case RepresentativeKind::kMaxAbs: return "MaxAbs";
  }
  return "L2";
}

struct Shape {
  GridDims dims;
  int32_t channels;
};

}  // namespace

void NetworkSpec::Validate() const {
  PF_CHECK(grid.height >= 1 && grid.width >= 1, ErrorCode::kShapeMismatch,
           "network grid must be positive");
  PF_CHECK(!layers.empty(), ErrorCode::kConfigParseError, "network has no layers");
  std::map<std::string, Shape> shapes;
  shapes["input"] = {grid, in_channels};
  Shape prev{grid, in_channels};
  for (const NetworkLayer& l : layers) {
    const std::string& name = l.spec.name;
    PF_CHECK(!name.empty() && !shapes.contains(name), ErrorCode::kConfigParseError,
             "layer names must be unique and non-empty ('" + name + "')");
    auto lookup = [&](const std::string& src) -> Shape {
      if (src == "prev") return prev;
      auto it = shapes.find(src);
      PF_CHECK(it != shapes.end(), ErrorCode::kConfigParseError,
               "layer '" + name + "' references unknown input '" + src + "'");
      return it->second;
    };
    Shape out;
    if (l.is_concat) {
      PF_CHECK(!l.inputs.empty(), ErrorCode::kConfigParseError,
               "concat '" + name + "' has no inputs");
      out = {lookup(l.inputs.front()).dims, 0};
      for (const auto& src : l.inputs) {
        const Shape s = lookup(src);
        PF_CHECK(s.dims == out.dims, ErrorCode::kShapeMismatch,
                 "concat '" + name + "': input '" + src + "' grid differs");
        out.channels += s.channels;
      }
    } else {
      const Shape in = lookup(l.inputs.empty() ? "prev" : l.inputs.front());
      PF_CHECK(in.channels == l.spec.in_channels, ErrorCode::kShapeMismatch,
               "layer '" + name + "' expects C=" + std::to_string(l.spec.in_channels) +
                   " but its input has " + std::to_string(in.channels));
      l.spec.Validate();
      out = {OutputDims(l.spec.variant, in.dims), l.spec.out_channels};
    }
    shapes[name] = out;
    prev = out;
  }
}

NetworkSpec ParseNetworkSpec(std::string_view json_text) {
  NetworkSpec net;
  try {
    const json j = json::parse(json_text);
    net.grid = {j.at("grid").at("height").get<int32_t>(),
                j.at("grid").at("width").get<int32_t>()};
    net.in_channels = j.at("in_channels").get<int32_t>();
    const auto seed = j.value("weight_seed", uint64_t{1});
    const int range = j.value("weight_range", 8);
    PF_CHECK(range >= 0 && range <= 127, ErrorCode::kConfigParseError,
             "weight_range must be in [0, 127]");
    int index = 0;
    for (const json& jl : j.at("layers")) {
      NetworkLayer l;
      l.spec.name = jl.value("name", "layer" + std::to_string(index));
      l.head = jl.value("head", false);
      const std::string variant = jl.at("variant").get<std::string>();
      if (variant == "Concat") {
        l.is_concat = true;
        l.inputs = jl.at("inputs").get<std::vector<std::string>>();
      } else {
        l.spec.variant = ConvVariant::Parse(variant, jl.value("threshold", 0.0));
        const int stride = jl.value("stride", l.spec.variant.stride());
        PF_CHECK(stride == l.spec.variant.stride(), ErrorCode::kConfigParseError,
                 "layer '" + l.spec.name + "': stride " + std::to_string(stride) +
                     " is invalid for " + variant);
        l.spec.in_channels = jl.at("C").get<int32_t>();
        l.spec.out_channels = jl.at("M").get<int32_t>();
        PF_CHECK(l.spec.in_channels >= 1 && l.spec.out_channels >= 1,
                 ErrorCode::kConfigParseError,
                 "layer '" + l.spec.name + "': channel counts must be >= 1");
        l.spec.requant.shift = jl.value("requant_shift", 0);
        l.spec.prune_after_requant = jl.value("prune_after_requant", false);
        l.spec.representative = ParseRepresentative(jl.value("representative", "L2"));
        l.inputs = {jl.value("input", std::string("prev"))};
        l.spec.weights = SyntheticWeights(
            seed * 1000003ULL + static_cast<uint64_t>(index),
            l.spec.variant.kernel_positions(), l.spec.in_channels,
            l.spec.out_channels, range);
      }
      net.layers.push_back(std::move(l));
      ++index;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, std::string("network json: ") + e.what());
  }
  net.Validate();
  return net;
}

NetworkSpec LoadNetworkSpec(const std::string& path) {
  std::ifstream in(path);
  PF_CHECK(in.good(), ErrorCode::kIoError, "cannot open network file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseNetworkSpec(ss.str());
}

std::string NetworkSpecToJson(const NetworkSpec& net) {
  json j;
  j["grid"] = {{"height", net.grid.height}, {"width", net.grid.width}};
  j["in_channels"] = net.in_channels;
  j["layers"] = json::array();
  for (const NetworkLayer& l : net.layers) {
    json jl;
    jl["name"] = l.spec.name;
    if (l.is_concat) {
      jl["variant"] = "Concat";
      jl["inputs"] = l.inputs;
    } else {
      jl["variant"] = std::string(l.spec.variant.name());
      jl["C"] = l.spec.in_channels;
      jl["M"] = l.spec.out_channels;
      jl["stride"] = l.spec.variant.stride();
      jl["threshold"] = l.spec.variant.threshold();
      jl["requant_shift"] = l.spec.requant.shift;
      jl["representative"] = RepresentativeName(l.spec.representative);
      jl["input"] = l.inputs.empty() ? "prev" : l.inputs.front();
    }
    if (l.head) jl["head"] = true;
    j["layers"].push_back(jl);
  }
  return j.dump(2);
}

CprTensor ConcatUnion(const std::vector<const CprTensor*>& parts) {
  PF_CHECK(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  const GridDims dims = parts.front()->dims();
  std::vector<Coord> all;
  int32_t channels = 0;
  for (const CprTensor* p : parts) {
    PF_CHECK(p->dims() == dims, ErrorCode::kShapeMismatch, "concat: grid dims differ");
    auto list = p->coords().ToList();
    all.insert(all.end(), list.begin(), list.end());
    channels += p->channels();
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const CprCoords uni = CprCoords::FromSorted(dims, all);
  std::vector<int32_t> feats(static_cast<size_t>(uni.size()) * channels, 0);
  int32_t offset = 0;
  for (const CprTensor* p : parts) {
    const CprTensor r = Restrict(*p, uni);
    for (int32_t i = 0; i < uni.size(); ++i) {
      auto f = r.feature(i);
      std::copy(f.begin(), f.end(),
                feats.begin() + int64_t{i} * channels + offset);
    }
    offset += p->channels();
  }
  return CprTensor(uni, channels, Precision::kInt8, std::move(feats));
}

NetworkResult RunNetwork(const NetworkSpec& net, const CprTensor& input,
                         const TileCapacity& caps) {
  net.Validate();
  PF_CHECK(input.dims() == net.grid && input.channels() == net.in_channels,
           ErrorCode::kShapeMismatch, "network input does not match grid/in_channels");
  NetworkResult res;
  std::map<std::string, size_t> index;
  auto resolve = [&](const std::string& src, size_t self) -> const CprTensor& {
    if (src == "input" || (src == "prev" && self == 0)) return input;
    if (src == "prev") return res.outputs[self - 1];
    return res.outputs[index.at(src)];
  };
  bool any_head = false;
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const NetworkLayer& l = net.layers[li];
    LayerReport rep;
    rep.name = l.spec.name;
    CprTensor out;
    if (l.is_concat) {
      std::vector<const CprTensor*> parts;
      for (const auto& src : l.inputs) parts.push_back(&resolve(src, li));
      out = ConcatUnion(parts);
      res.rules.emplace_back();
      rep.variant = "Concat";
      rep.active_in = parts.front()->pillar_count();
      rep.density_in = static_cast<double>(rep.active_in) /
                       static_cast<double>(parts.front()->dims().cells());
    } else {
      const CprTensor& in = resolve(l.inputs.empty() ? "prev" : l.inputs.front(), li);
      LayerResult lr = RunLayer(in, l.spec, caps);
      out = std::move(lr.output);
      res.rules.push_back(std::move(lr.rules));
      rep.variant = std::string(l.spec.variant.name());
      rep.stats = lr.stats;
      rep.active_in = in.pillar_count();
      rep.density_in = static_cast<double>(in.pillar_count()) /
                       static_cast<double>(in.dims().cells());
    }
    rep.active_out = out.pillar_count();
    rep.out_dims = out.dims();
    rep.density_out = static_cast<double>(out.pillar_count()) /
                      static_cast<double>(out.dims().cells());
    res.layers.push_back(rep);
    index[l.spec.name] = li;
    res.outputs.push_back(std::move(out));
    if (l.head) {
      any_head = true;
      res.heads.push_back(res.outputs.back());
      res.head_names.push_back(l.spec.name);
    }
  }
  if (!any_head) {
    res.heads.push_back(res.outputs.back());
    res.head_names.push_back(net.layers.back().spec.name);
  }
  return res;
}

}  // namespace pillarflow
