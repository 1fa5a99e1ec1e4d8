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

#include "pillarflow/gsu.hpp"

#include <algorithm>

namespace pillarflow {

int64_t TileDescriptor::rule_count() const {
  int64_t n = 0;
  for (const auto& [b, e] : rule_slices) n += e - b;
  return n;
}

void LayerSpec::Validate() const {
  PF_CHECK(in_channels >= 1 && out_channels >= 1, ErrorCode::kShapeMismatch,
           "layer '" + name + "': channel counts must be >= 1");
  PF_CHECK(weights.positions == variant.kernel_positions() &&
               weights.in_channels == in_channels &&
               weights.out_channels == out_channels,
           ErrorCode::kShapeMismatch,
           "layer '" + name + "': weight shape does not match layer");
  PF_CHECK(requant.shift >= 0, ErrorCode::kInvalidArgument,
           "layer '" + name + "': negative requantization shift");
}

namespace {

struct InputSpans {
  std::vector<int32_t> min_out;
  std::vector<int32_t> max_out;
  int32_t max_fan_in = 0;
};

InputSpans ComputeSpans(const RuleSet& rules) {
  InputSpans s;
  s.min_out.assign(rules.num_inputs, std::numeric_limits<int32_t>::max());
  s.max_out.assign(rules.num_inputs, -1);
  // Each (input, output) pair appears at most once across buffers, so the
  // per-output rule count is the number of distinct inputs feeding it.
  std::vector<int32_t> fan_in(rules.num_outputs(), 0);
  for (const auto& b : rules.buffers) {
    for (const RulePair& r : b) {
      s.min_out[r.input] = std::min(s.min_out[r.input], r.output);
      s.max_out[r.input] = std::max(s.max_out[r.input], r.output);
      s.max_fan_in = std::max(s.max_fan_in, ++fan_in[r.output]);
    }
  }
  return s;
}

}  // namespace

TileCapacity MinimalCapacities(const RuleSet& rules) {
  const InputSpans s = ComputeSpans(rules);
  const int32_t P = rules.num_inputs;
  TileCapacity caps{std::max(1, s.max_fan_in), 1};
  int32_t suffix_min = std::numeric_limits<int32_t>::max();
  std::vector<int32_t> sufmin(P);
  for (int32_t i = P - 1; i >= 0; --i) {
    suffix_min = std::min(suffix_min, s.min_out[i]);
    sufmin[i] = suffix_min;
  }
  int32_t prefix_max = -1;
  for (int32_t i = 0; i < P; ++i) {
    prefix_max = std::max(prefix_max, s.max_out[i]);
    if (prefix_max >= sufmin[i]) {
      caps.cap_out = std::max(caps.cap_out, prefix_max - sufmin[i] + 1);
    }
  }
  return caps;
}

std::vector<TileDescriptor> PlanTiles(const RuleSet& rules, int32_t cap_in,
                                      int32_t cap_out) {
  PF_CHECK(cap_in >= 1 && cap_out >= 1, ErrorCode::kCapacityTooSmall,
           "buffer capacities must be at least one pillar");
  const int32_t P = rules.num_inputs;
  std::vector<TileDescriptor> tiles;
  if (P == 0) return tiles;

  const InputSpans s = ComputeSpans(rules);
  PF_CHECK(s.max_fan_in <= cap_in, ErrorCode::kCapacityTooSmall,
           "an output needs " + std::to_string(s.max_fan_in) +
               " inputs but the input buffer holds " + std::to_string(cap_in));

  // Outputs below sufmin[i] receive nothing from inputs >= i.
  std::vector<int32_t> sufmin(P);
  int32_t m = rules.num_outputs();
  for (int32_t i = P - 1; i >= 0; --i) {
    m = std::min(m, s.min_out[i]);
    sufmin[i] = m;
  }
  std::vector<int32_t> prefmax(P);
  int32_t x = -1;
  for (int32_t i = 0; i < P; ++i) {
    x = std::max(x, s.max_out[i]);
    prefmax[i] = x;
  }
  auto span = [&](int32_t i, int32_t j) {
    return prefmax[j] < sufmin[i] ? 0 : prefmax[j] - sufmin[i] + 1;
  };

  std::vector<size_t> cursor(rules.buffers.size(), 0);
  int32_t i = 0;
  while (i < P) {
    PF_CHECK(span(i, i) <= cap_out, ErrorCode::kCapacityTooSmall,
             "input " + std::to_string(i) + " spans " +
                 std::to_string(span(i, i)) +
                 " outputs but the output buffer holds " +
                 std::to_string(cap_out));
    int32_t j = i;
    while (j + 1 < P && j + 2 - i <= cap_in && span(i, j + 1) <= cap_out) ++j;

    TileDescriptor t;
    t.input_start = i;
    t.input_end = j;
    t.output_start = std::min(sufmin[i], rules.num_outputs());
    t.output_end = std::max(prefmax[j], t.output_start - 1);
    t.flush_end = j + 1 < P ? std::min(sufmin[j + 1], t.output_end + 1)
                            : t.output_end + 1;
    t.flush_end = std::max(t.flush_end, t.output_start);
    t.rule_slices.resize(rules.buffers.size());
    for (size_t k = 0; k < rules.buffers.size(); ++k) {
      const auto& b = rules.buffers[k];
      const size_t begin = cursor[k];
      while (cursor[k] < b.size() && b[cursor[k]].input <= j) ++cursor[k];
      t.rule_slices[k] = {static_cast<int64_t>(begin),
                          static_cast<int64_t>(cursor[k])};
    }
    tiles.push_back(std::move(t));
    i = j + 1;
  }
  return tiles;
}

int64_t DenseMacs(const ConvVariant& variant, GridDims in, int32_t C,
                  int32_t M) {
  const int64_t cm = int64_t{C} * M;
  if (variant.is_deconv()) return in.cells() * 4 * cm;
  const int stride = variant.stride();
  auto taps = [&](int32_t n) {
    const int32_t outs = (n + stride - 1) / stride;
    int64_t count = 0;
    for (int32_t o = 0; o < outs; ++o) {
      for (int d = -1; d <= 1; ++d) {
        const int32_t x = o * stride + d;
        count += (x >= 0 && x < n) ? 1 : 0;
      }
    }
    return count;
  };
  return taps(in.height) * taps(in.width) * cm;
}

CprTensor PrunePillars(const CprTensor& t, double threshold,
                       RepresentativeKind kind) {
  std::vector<Coord> kept;
  std::vector<int32_t> feats;
  const CprCoords& cc = t.coords();
  for (int32_t r = 0; r < cc.dims.height; ++r) {
    for (int32_t i = cc.row_begin(r); i < cc.row_end(r); ++i) {
      auto f = t.feature(i);
      if (RepresentativeValue(f, kind) < threshold) continue;
      kept.push_back({r, cc.col_indices[i]});
      feats.insert(feats.end(), f.begin(), f.end());
    }
  }
  return CprTensor(CprCoords::FromSorted(cc.dims, kept), t.channels(),
                   t.precision(), std::move(feats));
}

LayerResult RunLayer(const CprTensor& input, const LayerSpec& layer,
                     const TileCapacity& caps) {
  layer.Validate();
  PF_CHECK(input.channels() == layer.in_channels, ErrorCode::kShapeMismatch,
           "layer '" + layer.name + "' expects " +
               std::to_string(layer.in_channels) + " channels, input has " +
               std::to_string(input.channels()));

  LayerResult res;
  res.rules = GenerateRules(input.coords(), layer.variant);
  res.tiles = PlanTiles(res.rules, caps.cap_in, caps.cap_out);

  const int32_t C = layer.in_channels;
  const int32_t M = layer.out_channels;
  const int32_t num_out = res.rules.num_outputs();
  std::vector<int32_t> final_acc(static_cast<size_t>(num_out) * M, 0);
  std::vector<int32_t> gather_count(input.pillar_count(), 0);

  OpStats& st = res.stats;
  std::vector<int32_t> in_buf;
  std::vector<int32_t> out_buf;
  std::vector<int32_t> carry;
  for (const TileDescriptor& t : res.tiles) {
    // Gather: the tile's input window is loaded once and reused by every
    // kernel position.
    in_buf.assign(static_cast<size_t>(t.input_count()) * C, 0);
    for (int32_t i = t.input_start; i <= t.input_end; ++i) {
      auto f = input.feature(i);
      std::copy(f.begin(), f.end(),
                in_buf.begin() + static_cast<int64_t>(i - t.input_start) * C);
      ++gather_count[i];
    }
    st.gather_records += t.input_count();

    // Output buffer starts with the psums carried over from the previous tile.
    out_buf.assign(static_cast<size_t>(std::max(0, t.output_count())) * M, 0);
    std::copy(carry.begin(), carry.end(), out_buf.begin());

    for (size_t k = 0; k < t.rule_slices.size(); ++k) {
      const auto w = layer.weights.matrix(static_cast<int32_t>(k));
      const auto& buf = res.rules.buffers[k];
      for (int64_t ri = t.rule_slices[k].first; ri < t.rule_slices[k].second; ++ri) {
        const RulePair& r = buf[ri];
        const int32_t* src = in_buf.data() + int64_t{r.input - t.input_start} * C;
        int32_t* dst = out_buf.data() + int64_t{r.output - t.output_start} * M;
        for (int32_t c = 0; c < C; ++c) {
          const int32_t a = src[c];
          if (a == 0) continue;
          const int8_t* wrow = w.data() + int64_t{c} * M;
          for (int32_t m = 0; m < M; ++m) dst[m] += a * int32_t{wrow[m]};
        }
      }
      st.rules += t.rule_slices[k].second - t.rule_slices[k].first;
    }

    // Flush finalized outputs; copy the boundary psums forward.
    const int64_t flushed = t.flush_end - t.output_start;
    std::copy(out_buf.begin(), out_buf.begin() + flushed * M,
              final_acc.begin() + int64_t{t.output_start} * M);
    carry.assign(out_buf.begin() + flushed * M, out_buf.end());
    st.psum_carried += t.carried_outputs();
  }

  st.tiles = static_cast<int64_t>(res.tiles.size());
  st.macs_performed = st.rules * C * M;
  st.dense_macs_equivalent = DenseMacs(layer.variant, input.dims(), C, M);
  st.pillars_in = input.pillar_count();
  st.bytes_gathered = st.gather_records * C;
  st.max_gathers_per_input =
      gather_count.empty() ? 0 : *std::max_element(gather_count.begin(), gather_count.end());

  res.accumulators = CprTensor(res.rules.out_coords, M, Precision::kInt32,
                               std::move(final_acc));
  const bool prune = layer.variant.kind() == ConvVariant::Kind::kSpConvP;
  if (prune && !layer.prune_after_requant) {
    res.output = RequantizeTensor(
        PrunePillars(res.accumulators, layer.prune_threshold(), layer.representative),
        layer.requant);
  } else {
    res.output = RequantizeTensor(res.accumulators, layer.requant);
    if (prune) {
      res.output = PrunePillars(res.output, layer.prune_threshold(), layer.representative);
    }
  }
  st.pillars_out = res.output.pillar_count();
  st.pillars_pruned = num_out - st.pillars_out;
  st.bytes_scattered = st.pillars_out * M;
  return res;
}

}  // namespace pillarflow
