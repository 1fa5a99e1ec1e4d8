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

#include "pillarflow/rulegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pillarflow {

int64_t RuleSet::total_rules() const {
  int64_t n = 0;
  for (const auto& b : buffers) n += static_cast<int64_t>(b.size());
  return n;
}

std::vector<int64_t> RuleSet::counts() const {
  std::vector<int64_t> c;
  c.reserve(buffers.size());
  for (const auto& b : buffers) c.push_back(static_cast<int64_t>(b.size()));
  return c;
}

bool RuleSet::IsMonotone() const {
  for (const auto& b : buffers) {
    for (size_t i = 1; i < b.size(); ++i) {
      if (b[i].input < b[i - 1].input || b[i].output < b[i - 1].output) {
        return false;
      }
    }
  }
  return true;
}

void RuleSet::Validate() const {
  PF_CHECK(static_cast<int>(buffers.size()) == variant.kernel_positions(),
           ErrorCode::kInvariantViolation, "one rule buffer per kernel position");
  for (const auto& b : buffers) {
    for (const RulePair& r : b) {
      PF_CHECK(r.input >= 0 && r.input < num_inputs,
               ErrorCode::kInvariantViolation, "rule input index out of range");
      PF_CHECK(r.output >= 0 && r.output < num_outputs(),
               ErrorCode::kInvariantViolation, "rule output index out of range");
    }
  }
  PF_CHECK(IsMonotone(), ErrorCode::kInvariantViolation,
           "rule buffer index streams must be non-decreasing");
}

namespace {

// Column of one merged entry: which of the three aligned input rows (top,
// center, bottom) hold an active pillar at this column.
struct MergedColumn {
  int32_t col;
  std::array<int32_t, 3> input;  // -1 when absent
};

// Row merge over three aligned input rows. Rows outside the grid are empty.
void MergeRows(const CprCoords& in, int32_t center_row,
               std::vector<MergedColumn>& merged) {
  merged.clear();
  std::array<int32_t, 3> cur{};
  std::array<int32_t, 3> end{};
  for (int s = 0; s < 3; ++s) {
    const int32_t r = center_row + s - 1;
    if (r >= 0 && r < in.dims.height) {
      cur[s] = in.row_begin(r);
      end[s] = in.row_end(r);
    } else {
      cur[s] = end[s] = 0;
    }
  }
  constexpr int32_t kNone = std::numeric_limits<int32_t>::max();
  while (true) {
    int32_t min_col = kNone;
    for (int s = 0; s < 3; ++s) {
      if (cur[s] < end[s]) min_col = std::min(min_col, in.col_indices[cur[s]]);
    }
    if (min_col == kNone) break;
    MergedColumn m{min_col, {-1, -1, -1}};
    for (int s = 0; s < 3; ++s) {
      if (cur[s] < end[s] && in.col_indices[cur[s]] == min_col) {
        m.input[s] = cur[s]++;
      }
    }
    merged.push_back(m);
  }
}

// Clears `rs` for a new layer while keeping the capacity of its vectors.
void ResetRuleSet(RuleSet& rs, const ConvVariant& variant, GridDims in_dims,
                  int32_t num_inputs, GridDims out_dims) {
  rs.variant = variant;
  rs.in_dims = in_dims;
  rs.num_inputs = num_inputs;
  rs.out_coords.dims = out_dims;
  rs.out_coords.row_starts.assign(static_cast<size_t>(out_dims.height) + 1, 0);
  rs.out_coords.col_indices.clear();
  rs.buffers.resize(static_cast<size_t>(variant.kernel_positions()));
  for (auto& b : rs.buffers) b.clear();
}

// Streaming generation for SpConv / SpConvP / SpConvS / SpStConv.
void GenerateConvRules(const CprCoords& in, const ConvVariant& variant,
                       RuleSet& rs) {
  const GridDims out_dims = OutputDims(variant, in.dims);
  const int stride = variant.stride();
  const bool submanifold = variant.kind() == ConvVariant::Kind::kSpConvS;

  ResetRuleSet(rs, variant, in.dims, in.size(), out_dims);
  rs.out_coords.col_indices.reserve(static_cast<size_t>(
      std::min<int64_t>(out_dims.cells(), int64_t{in.size()} * (submanifold ? 1 : 9))));
  // Each input reaches at most one output per kernel position.
  for (auto& b : rs.buffers) b.reserve(static_cast<size_t>(in.size()));

  thread_local std::vector<MergedColumn> merged;
  thread_local std::vector<int32_t> out_cols;  // output columns of the row
  for (int32_t orow = 0; orow < out_dims.height; ++orow) {
    const int32_t center = orow * stride;
    // Alignment + row merge.
    MergeRows(in, center, merged);

    // Column-wise dilation: active output columns of this row, ascending.
    out_cols.clear();
    if (submanifold) {
      for (int32_t i = in.row_begin(center); i < in.row_end(center); ++i) {
        out_cols.push_back(in.col_indices[i]);
      }
    } else {
      for (const MergedColumn& m : merged) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int32_t x = m.col + dc;
          if (x < 0 || x >= in.dims.width || x % stride != 0) continue;
          const int32_t oc = x / stride;
          if (out_cols.empty() || out_cols.back() < oc) out_cols.push_back(oc);
        }
      }
    }
    const int32_t base = rs.out_coords.row_starts[orow];
    rs.out_coords.row_starts[orow + 1] =
        base + static_cast<int32_t>(out_cols.size());
    rs.out_coords.col_indices.insert(rs.out_coords.col_indices.end(),
                                     out_cols.begin(), out_cols.end());

    // Each merged column feeds the three dilation banks; targets for a fixed
    // dc ascend with the merged column, so one cursor per bank suffices.
    std::array<size_t, 3> cursor{0, 0, 0};
    for (const MergedColumn& m : merged) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int32_t x = m.col + dc;
        if (x < 0 || x >= in.dims.width || x % stride != 0) continue;
        const int32_t oc = x / stride;
        size_t& p = cursor[dc + 1];
        while (p < out_cols.size() && out_cols[p] < oc) ++p;
        if (p == out_cols.size() || out_cols[p] != oc) continue;  // SpConvS
        const int32_t out_idx = base + static_cast<int32_t>(p);
        for (int s = 0; s < 3; ++s) {
          if (m.input[s] < 0) continue;
          rs.buffers[KernelIndex(s - 1, dc)].push_back({m.input[s], out_idx});
        }
      }
    }
  }
}

// Deconvolution expands each input row into two output rows.
void GenerateDeconvRules(const CprCoords& in, const ConvVariant& variant,
                         RuleSet& rs) {
  ResetRuleSet(rs, variant, in.dims, in.size(), OutputDims(variant, in.dims));
  rs.out_coords.col_indices.reserve(2 * static_cast<size_t>(in.size()));
  for (auto& b : rs.buffers) b.reserve(static_cast<size_t>(in.size()));
  auto& oc = rs.out_coords;
  for (int32_t r = 0; r < in.dims.height; ++r) {
    const int32_t n = in.row_end(r) - in.row_begin(r);
    for (int a = 0; a < 2; ++a) {
      const int32_t orow = 2 * r + a;
      const int32_t base = oc.row_starts[orow];
      oc.row_starts[orow + 1] = base + 2 * n;
      for (int32_t i = in.row_begin(r); i < in.row_end(r); ++i) {
        const int32_t c = in.col_indices[i];
        const int32_t slot = base + 2 * (i - in.row_begin(r));
        oc.col_indices.push_back(2 * c);
        oc.col_indices.push_back(2 * c + 1);
        rs.buffers[a * 2 + 0].push_back({i, slot});
        rs.buffers[a * 2 + 1].push_back({i, slot + 1});
      }
    }
  }
}

}  // namespace

void GenerateRulesInto(const CprCoords& coords, const ConvVariant& variant,
                       RuleSet* out) {
  PF_CHECK(out != nullptr, ErrorCode::kInvalidArgument, "null rule set");
  for (int32_t c : coords.col_indices) {
    PF_CHECK(c >= 0 && c < coords.dims.width, ErrorCode::kCoordinateOutOfBounds,
             "column index outside grid");
  }
  PF_CHECK(coords.row_starts.size() == static_cast<size_t>(coords.dims.height) + 1,
           ErrorCode::kCoordinateOutOfBounds, "row offsets do not match grid height");
  if (variant.is_deconv()) {
    GenerateDeconvRules(coords, variant, *out);
  } else {
    GenerateConvRules(coords, variant, *out);
  }
}

RuleSet GenerateRules(const CprCoords& coords, const ConvVariant& variant) {
  RuleSet rs;
  GenerateRulesInto(coords, variant, &rs);
  return rs;
}

void BruteForceRulesInto(const CprCoords& coords, const ConvVariant& variant,
                         RuleSet* result) {
  PF_CHECK(result != nullptr, ErrorCode::kInvalidArgument, "null rule set");
  const GridDims in = coords.dims;
  const GridDims out = OutputDims(variant, in);
  const int K = variant.kernel_positions();
  thread_local std::vector<Coord> inputs;  // row-major sorted
  inputs.clear();
  for (int32_t r = 0; r < in.height; ++r) {
    for (int32_t i = coords.row_begin(r); i < coords.row_end(r); ++i)
      inputs.push_back({r, coords.col_indices[i]});
  }

  struct Candidate {
    int k;
    int32_t input;
    Coord target;
  };
  thread_local std::vector<Candidate> cands;
  cands.clear();
  std::array<KernelPos, 9> offsets{};
  for (int k = 0; k < K; ++k) offsets[k] = KernelPosition(variant, k);
  for (int32_t i = 0; i < static_cast<int32_t>(inputs.size()); ++i) {
    const Coord p = inputs[i];
    for (int k = 0; k < K; ++k) {
      const KernelPos kp = offsets[k];
      Coord t;
      switch (variant.kind()) {
        case ConvVariant::Kind::kSpDeconv:
          t = {2 * p.row + kp.dr, 2 * p.col + kp.dc};
          break;
        case ConvVariant::Kind::kSpStConv: {
          const int32_t r = p.row - kp.dr;
          const int32_t c = p.col + kp.dc;
          if (!in.Contains(r, c) || r % 2 != 0 || c % 2 != 0) continue;
          t = {r / 2, c / 2};
          break;
        }
        case ConvVariant::Kind::kSpConvS:
          t = {p.row - kp.dr, p.col + kp.dc};
          if (!std::binary_search(inputs.begin(), inputs.end(), t)) continue;
          break;
        default:
          t = {p.row - kp.dr, p.col + kp.dc};
          if (!out.Contains(t.row, t.col)) continue;
          break;
      }
      cands.push_back({k, i, t});
    }
  }
  // Output indices follow row-major order over the output grid.
  thread_local std::vector<int32_t> slot;
  slot.assign(static_cast<size_t>(out.cells()), -1);
  for (const Candidate& c : cands)
    slot[int64_t{c.target.row} * out.width + c.target.col] = 0;
  thread_local std::vector<Coord> out_list;
  out_list.clear();
  for (int64_t cell = 0; cell < out.cells(); ++cell) {
    if (slot[cell] < 0) continue;
    slot[cell] = static_cast<int32_t>(out_list.size());
    out_list.push_back({static_cast<int32_t>(cell / out.width),
                        static_cast<int32_t>(cell % out.width)});
  }
  RuleSet& rs = *result;
  ResetRuleSet(rs, variant, in, coords.size(), out);
  for (const Coord& c : out_list) {
    ++rs.out_coords.row_starts[c.row + 1];
    rs.out_coords.col_indices.push_back(c.col);
  }
  for (int32_t r = 0; r < out.height; ++r)
    rs.out_coords.row_starts[r + 1] += rs.out_coords.row_starts[r];
  std::array<size_t, 9> per_k{};
  for (const Candidate& c : cands) ++per_k[c.k];
  for (int k = 0; k < K; ++k) {
    if (per_k[k] > 0) rs.buffers[k].reserve(per_k[k]);
  }
  for (const Candidate& c : cands) {
    rs.buffers[c.k].push_back(
        {c.input, slot[int64_t{c.target.row} * out.width + c.target.col]});
  }
  for (auto& b : rs.buffers) {
    if (!std::is_sorted(b.begin(), b.end())) std::sort(b.begin(), b.end());
  }
}

RuleSet BruteForceRules(const CprCoords& coords, const ConvVariant& variant) {
  RuleSet rs;
  BruteForceRulesInto(coords, variant, &rs);
  return rs;
}

bool EquivalentRuleSets(const RuleSet& a, const RuleSet& b) {
  if (!(a.out_coords == b.out_coords)) return false;
  if (a.buffers.size() != b.buffers.size()) return false;
  for (size_t k = 0; k < a.buffers.size(); ++k) {
    const auto& xa = a.buffers[k];
    const auto& yb = b.buffers[k];
    if (xa.size() != yb.size()) return false;
    if (std::is_sorted(xa.begin(), xa.end()) &&
        std::is_sorted(yb.begin(), yb.end())) {
      if (xa != yb) return false;
      continue;
    }
    auto x = xa;
    auto y = yb;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) return false;
  }
  return true;
}

int64_t RguCycles(int64_t num_inputs, int64_t total_rules,
                  const RuleGenCostConfig& cfg) {
  const auto rule_cycles = static_cast<int64_t>(
      std::ceil(static_cast<double>(total_rules) / cfg.rgu_rules_per_cycle));
  return cfg.rgu_pipeline_fill + std::max(num_inputs, rule_cycles);
}

int64_t RguCycles(const RuleSet& rules, const RuleGenCostConfig& cfg) {
  return RguCycles(rules.num_inputs, rules.total_rules(), cfg);
}

namespace {

class ChainedHashTable {
 public:
  explicit ChainedHashTable(size_t buckets) : heads_(std::max<size_t>(buckets, 1), -1) {}

  // Returns the number of chain nodes visited; inserts if absent.
  int64_t InsertOrFind(uint64_t key, bool insert, bool* found) {
    const size_t b = Bucket(key);
    int64_t probes = 0;
    for (int32_t n = heads_[b]; n >= 0; n = nodes_[n].next) {
      ++probes;
      if (nodes_[n].key == key) {
        *found = true;
        return probes;
      }
    }
    *found = false;
    if (insert) {
      nodes_.push_back({key, heads_[b]});
      heads_[b] = static_cast<int32_t>(nodes_.size() - 1);
    }
    return probes;
  }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    uint64_t key;
    int32_t next;
  };
  size_t Bucket(uint64_t key) const {
    return static_cast<size_t>((key * 0x9E3779B97F4A7C15ULL) >> 32) % heads_.size();
  }
  std::vector<int32_t> heads_;
  std::vector<Node> nodes_;
};

}  // namespace

HashBaselineResult HashBaselineCycles(const CprCoords& coords,
                                      const ConvVariant& variant,
                                      const RuleGenCostConfig& cfg) {
  const GridDims in = coords.dims;
  const GridDims out = OutputDims(variant, in);
  const int64_t P = coords.size();
  ChainedHashTable table(static_cast<size_t>(cfg.hash_main_table_factor * P));
  HashBaselineResult res;
  auto op = [&](const Coord& c, bool insert) {
    bool found = false;
    const uint64_t key = static_cast<uint64_t>(c.row) * static_cast<uint64_t>(out.width + 1) +
                         static_cast<uint64_t>(c.col);
    const int64_t probes = table.InsertOrFind(key, insert, &found);
    res.operations += 1;
    res.probes += probes;
    res.cycles += 1 + probes * cfg.hash_probe_cost;
  };

  const std::vector<Coord> inputs = coords.ToList();
  if (variant.kind() == ConvVariant::Kind::kSpConvS) {
    // Build the table over active inputs, then query every neighbor.
    for (const Coord& p : inputs) op(p, true);
    for (const Coord& p : inputs) {
      for (int k = 0; k < 9; ++k) {
        const KernelPos kp = KernelPosition(variant, k);
        const Coord t{p.row - kp.dr, p.col + kp.dc};
        if (out.Contains(t.row, t.col)) op(t, false);
      }
    }
  } else {
    for (const Coord& p : inputs) {
      for (int k = 0; k < variant.kernel_positions(); ++k) {
        const KernelPos kp = KernelPosition(variant, k);
        Coord t;
        if (variant.is_deconv()) {
          t = {2 * p.row + kp.dr, 2 * p.col + kp.dc};
        } else if (variant.is_strided()) {
          const int32_t r = p.row - kp.dr;
          const int32_t c = p.col + kp.dc;
          if (!in.Contains(r, c) || r % 2 != 0 || c % 2 != 0) continue;
          t = {r / 2, c / 2};
        } else {
          t = {p.row - kp.dr, p.col + kp.dc};
          if (!out.Contains(t.row, t.col)) continue;
        }
        op(t, true);
      }
    }
  }
  res.unique_keys = static_cast<int64_t>(table.size());
  return res;
}

int64_t MergeSortBaselineCycles(int64_t num_pillars,
                                const RuleGenCostConfig& cfg) {
  PF_CHECK(num_pillars >= 0, ErrorCode::kInvalidArgument,
           "pillar count must be non-negative");
  if (num_pillars == 0) return 0;
  const double n = static_cast<double>(num_pillars * cfg.kernel_positions);
  const double width = static_cast<double>(cfg.sort_merge_width);
  const double blocks = std::ceil(n / width);
  const double levels = std::max(1.0, std::log2(blocks));
  return static_cast<int64_t>(
      std::ceil(blocks * std::log2(width) * levels + n / width));
}

}  // namespace pillarflow
