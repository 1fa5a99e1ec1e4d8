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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "pillarflow/oracle.hpp"
#include "pillarflow/rulegen.hpp"
#include "test_util.hpp"

using namespace pillarflow;

namespace {

// Inputs I0..I4 of the worked alignment / merge / dilation example, with the
// symbolic columns C1..C4 bound to 1..4.
CprCoords WorkedExample() {
  std::vector<Coord> c{{1, 1}, {1, 2}, {2, 1}, {2, 4}, {3, 3}};
  return BuildCprCoords(c, {6, 8});
}

std::vector<std::pair<int, int32_t>> RulesInto(const RuleSet& rs, int32_t out) {
  std::vector<std::pair<int, int32_t>> v;
  for (size_t k = 0; k < rs.buffers.size(); ++k) {
    for (const RulePair& r : rs.buffers[k]) {
      if (r.output == out) v.emplace_back(static_cast<int>(k), r.input);
    }
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("worked example: merge, dilation and output numbering") {
  const auto rs = GenerateRules(WorkedExample(), ConvVariant::SpConv());
  rs.Validate();
  const auto& oc = rs.out_coords;
  // Output row 2: merged columns {1,2,3,4} dilate to columns 0..5.
  CHECK(oc.row_begin(2) == 10);
  CHECK(oc.row_end(2) == 16);
  for (int32_t i = 10; i < 16; ++i) CHECK(oc.at(i) == Coord{2, i - 10});

  // O14 = I3 * W(0,0) + I4 * W(+,+).
  const int32_t o14 = oc.Find(2, 4);
  CHECK(o14 == 14);
  CHECK(RulesInto(rs, o14) ==
        std::vector<std::pair<int, int32_t>>{{KernelIndex(0, 0), 3},
                                             {KernelIndex(1, 1), 4}});
  // I4 feeds W(+,-) -> O12, W(+,0) -> O13, W(+,+) -> O14.
  std::map<int, int32_t> from_i4;
  for (size_t k = 0; k < rs.buffers.size(); ++k) {
    for (const RulePair& r : rs.buffers[k]) {
      if (r.input == 4 && oc.at(r.output).row == 2) from_i4[static_cast<int>(k)] = r.output;
    }
  }
  CHECK(from_i4 == std::map<int, int32_t>{{KernelIndex(1, -1), 12},
                                          {KernelIndex(1, 0), 13},
                                          {KernelIndex(1, 1), 14}});
}

TEST_CASE("single pillar cases") {
  std::vector<Coord> c{{5, 5}};
  const auto one = BuildCprCoords(c, {16, 16});
  const auto sub = GenerateRules(one, ConvVariant::SpConvS());
  CHECK(sub.total_rules() == 1);
  CHECK(sub.buffers[KernelIndex(0, 0)] == std::vector<RulePair>{{0, 0}});
  CHECK(sub.out_coords.ToList() == std::vector<Coord>{{5, 5}});

  const auto bf = BruteForceRules(one, ConvVariant::SpConv());
  CHECK(bf.total_rules() == 9);
  for (const auto& b : bf.buffers) CHECK(b.size() == 1);

  std::vector<Coord> c33{{3, 3}};
  const auto dec = BruteForceRules(BuildCprCoords(c33, {8, 8}), ConvVariant::SpDeconv());
  CHECK(dec.total_rules() == 4);
  CHECK(dec.out_coords.ToList() ==
        std::vector<Coord>{{6, 6}, {6, 7}, {7, 6}, {7, 7}});

  const auto empty = BruteForceRules(BuildCprCoords({}, {8, 8}), ConvVariant::SpConv());
  CHECK(empty.total_rules() == 0);
  CHECK(empty.num_outputs() == 0);
}

TEST_CASE("streaming generator matches brute force on random inputs") {
  std::mt19937_64 rng(2024);
  for (auto kind : kAllVariantKinds) {
    for (int trial = 0; trial < 20; ++trial) {
      auto coords = BuildCprCoords(pftest::RandomCoords(rng, {64, 64}, 200), {64, 64});
      const auto v = pftest::VariantOf(kind, 1.0);
      const auto gen = GenerateRules(coords, v);
      const auto ref = BruteForceRules(coords, v);
      CHECK(gen.IsMonotone());
      gen.Validate();
      CHECK(EquivalentRuleSets(gen, ref));
      CHECK(gen.out_coords == ActiveSetOracle(coords, v));
      CHECK(gen.total_rules() == CountContributingPairs(coords, v));
    }
  }
}

TEST_CASE("odd grid sizes and boundary pillars") {
  std::mt19937_64 rng(99);
  for (int h = 1; h <= 7; ++h) {
    for (int w = 1; w <= 7; ++w) {
      for (auto kind : kAllVariantKinds) {
        auto coords = BuildCprCoords(
            pftest::RandomCoords(rng, {h, w}, (h * w + 1) / 2), {h, w});
        const auto v = pftest::VariantOf(kind);
        CHECK(EquivalentRuleSets(GenerateRules(coords, v), BruteForceRules(coords, v)));
      }
    }
  }
}

TEST_CASE("structural properties") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto coords = BuildCprCoords(pftest::RandomCoords(rng, {40, 40}, 150), {40, 40});
    CHECK(GenerateRules(coords, ConvVariant::SpConvS()).out_coords == coords);
    const auto dec = GenerateRules(coords, ConvVariant::SpDeconv());
    std::vector<int> hits(dec.num_outputs(), 0);
    for (const auto& b : dec.buffers) {
      for (const RulePair& r : b) hits[r.output]++;
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    // SpConvP maps like SpConv.
    const auto p = GenerateRules(coords, ConvVariant::SpConvP(3.0));
    const auto s = GenerateRules(coords, ConvVariant::SpConv());
    CHECK(p.buffers == s.buffers);
  }
}

TEST_CASE("interior rule count is 9 per pillar") {
  std::vector<Coord> c{{3, 3}, {3, 4}, {10, 10}};
  const auto rs = GenerateRules(BuildCprCoords(c, {20, 20}), ConvVariant::SpConv());
  CHECK(rs.total_rules() == 27);
  std::vector<Coord> corner{{0, 0}};
  CHECK(GenerateRules(BuildCprCoords(corner, {20, 20}), ConvVariant::SpConv())
            .total_rules() == 4);
}

TEST_CASE("RGU cycle model") {
  RuleGenCostConfig cfg;
  CHECK(RguCycles(0, 0, cfg) == cfg.rgu_pipeline_fill);
  CHECK(RguCycles(1000, 9000, cfg) == 3000 + cfg.rgu_pipeline_fill);
  CHECK(RguCycles(2000, 18000, cfg) - cfg.rgu_pipeline_fill ==
        2 * (RguCycles(1000, 9000, cfg) - cfg.rgu_pipeline_fill));
  // Sparse rules: bounded below by one cycle per input.
  CHECK(RguCycles(1000, 1000, cfg) == 1000 + cfg.rgu_pipeline_fill);
}

TEST_CASE("hash baseline") {
  RuleGenCostConfig cfg;
  std::vector<Coord> c{{5, 5}};
  const auto one = BuildCprCoords(c, {16, 16});
  const auto r = HashBaselineCycles(one, ConvVariant::SpConv(), cfg);
  CHECK(r.operations == 9);
  CHECK(r.cycles >= 9);

  std::mt19937_64 rng(1);
  auto coords = BuildCprCoords(pftest::RandomCoords(rng, {100, 100}, 1500), {100, 100});
  const auto a = HashBaselineCycles(coords, ConvVariant::SpConv(), cfg);
  const auto b = HashBaselineCycles(coords, ConvVariant::SpConv(), cfg);
  CHECK(a.cycles == b.cycles);
  CHECK(a.unique_keys == ActiveSetOracle(coords, ConvVariant::SpConv()).size());
}

TEST_CASE("merge-sort baseline formula") {
  RuleGenCostConfig cfg;
  CHECK(MergeSortBaselineCycles(0, cfg) == 0);
  // P=64, K=9, N=64: 9 blocks, 6 merge stages, log2(9) passes, +9.
  const double expect = 9.0 * 6.0 * std::log2(9.0) + 9.0;
  CHECK(MergeSortBaselineCycles(64, cfg) == static_cast<int64_t>(std::ceil(expect)));
  for (int64_t p : {1000, 5000, 20000}) {
    CHECK(MergeSortBaselineCycles(2 * p, cfg) > 2 * MergeSortBaselineCycles(p, cfg));
  }
}
