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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and
// benchmark settings are pinned below. Exit status is the number of failed
// criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pillarflow/gsu.hpp"
#include "pillarflow/network.hpp"
#include "pillarflow/oracle.hpp"
#include "pillarflow/rulegen.hpp"
#include "pillarflow/scenario.hpp"
#include "pillarflow/sim.hpp"

namespace {

using namespace pillarflow;
using nlohmann::ordered_json;

// Pinned tolerances and benchmark settings.
constexpr int kExhaustiveGrid = 8;
constexpr int kExhaustiveMaxPillars = 5;
constexpr int kRandomRuleInstances = 1000;
constexpr int kRandomRuleGrid = 64;
constexpr double kMaxRuleSuiteSeconds = 60.0;
constexpr int kExactLayers = 500;
constexpr int kTilingLayers = 300;
constexpr double kMinR2 = 0.999;
constexpr int64_t kMinRguComparePillars = 1024;
constexpr double kHashRatioLo = 3.0, kHashRatioHi = 12.0;
constexpr double kSortRatioLo = 2.0, kSortRatioHi = 8.0;
constexpr double kGatherDramSlack = 0.01;
constexpr double kMinUtilization = 0.90;
constexpr double kMaxStallShareRatio = 0.60;
constexpr double kEnergyOpsTolerance = 0.05;
constexpr GridDims kBevGrid{496, 432};
constexpr int64_t kUtilPillars[] = {2048, 8192, 16384};
constexpr int64_t kStridedPillars = 12000;
constexpr GridDims kDeconvGrid{62, 54};
constexpr int64_t kDeconvPillars = 1700;
constexpr double kTrendDensities[] = {0.03, 0.05};
constexpr uint64_t kSeed = 20260101;

const ConvVariant kVariants[] = {ConvVariant::SpConv(), ConvVariant::SpConvS(),
                                 ConvVariant::SpConvP(0.0), ConvVariant::SpStConv(),
                                 ConvVariant::SpDeconv()};

struct Verdict {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;
int g_evaluated = 0;

void Print(int id, const char* title, const Verdict& v) {
  ++g_evaluated;
  if (!v.pass) ++g_failed;
  std::printf("AC%-2d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", title,
              v.detail.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

int Workers() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

// Runs body(i) for i in [0, n) on a small pool.
template <typename F>
void ParallelFor(int64_t n, F body) {
  std::atomic<int64_t> next{0};
  auto worker = [&] {
    for (int64_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  const int w = static_cast<int>(std::min<int64_t>(Workers(), n));
  for (int t = 1; t < w; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

CprTensor RandomInput(std::mt19937_64& rng, GridDims dims, double density,
                      int32_t channels) {
  return GenSyntheticPillars(dims, channels, density,
                             static_cast<int32_t>(1 + rng() % 6), 3.0, rng());
}

WeightKernel RandomWeights(std::mt19937_64& rng, int k, int c, int m) {
  WeightKernel w(k, c, m);
  std::uniform_int_distribution<int> d(-128, 127);
  for (auto& x : w.values) x = static_cast<int8_t>(d(rng));
  return w;
}

double UniformDensity(std::mt19937_64& rng) {
  return 0.01 + 0.29 * std::uniform_real_distribution<>(0.0, 1.0)(rng);
}

// Synthetic benchmark input with exactly `pillars` active cells.
CprTensor BenchmarkInput(GridDims dims, int64_t pillars, int32_t channels) {
  const double density =
      static_cast<double>(pillars) / static_cast<double>(dims.cells());
  return GenSyntheticPillars(dims, channels, density, 64, 6.0, kSeed);
}

LayerSpec BenchLayer(const ConvVariant& v, int32_t C, int32_t M) {
  std::mt19937_64 rng(kSeed);
  LayerSpec l;
  l.name = std::string(v.name());
  l.variant = v;
  l.in_channels = C;
  l.out_channels = M;
  l.weights = RandomWeights(rng, v.kernel_positions(), C, M);
  return l;
}

// ---------------------------------------------------------------------------
// AC1 + AC3: rule equivalence and monotonicity.

struct RuleSuite {
  int64_t exhaustive_sets = 0;
  int64_t random_sets = 0;
  int64_t mismatches = 0;
  int64_t monotone_violations = 0;
  double exhaustive_seconds = 0.0;
  double seconds = 0.0;
};

RuleSuite RunRuleSuite() {
  RuleSuite s;
  const auto t0 = std::chrono::steady_clock::now();
  const GridDims dims{kExhaustiveGrid, kExhaustiveGrid};
  const int cells = kExhaustiveGrid * kExhaustiveGrid;
  std::atomic<int64_t> sets{0}, bad{0}, nonmono{0};

  // Every subset of size <= 5, enumerated in lexicographic order of cell
  // indices (already row-major sorted), split by its first cell.
  auto check = [&](const CprCoords& cc) {
    thread_local RuleSet a, b;
    for (const ConvVariant& v : kVariants) {
      GenerateRulesInto(cc, v, &a);
      BruteForceRulesInto(cc, v, &b);
      if (!EquivalentRuleSets(a, b)) ++bad;
      if (!a.IsMonotone()) ++nonmono;
    }
  };
  check(CprCoords(dims));  // empty set
  sets += 1;
  ParallelFor(cells, [&](int64_t first) {
    CprCoords cc(dims);
    std::vector<int> idx = {static_cast<int>(first)};
    int64_t local = 0;
    // Depth-first extension of idx with strictly increasing cell indices.
    auto visit = [&](auto&& self) -> void {
      std::fill(cc.row_starts.begin(), cc.row_starts.end(), 0);
      cc.col_indices.clear();
      for (int i : idx) {
        ++cc.row_starts[i / kExhaustiveGrid + 1];
        cc.col_indices.push_back(i % kExhaustiveGrid);
      }
      for (int r = 0; r < kExhaustiveGrid; ++r) cc.row_starts[r + 1] += cc.row_starts[r];
      check(cc);
      ++local;
      if (static_cast<int>(idx.size()) == kExhaustiveMaxPillars) return;
      for (int n = idx.back() + 1; n < cells; ++n) {
        idx.push_back(n);
        self(self);
        idx.pop_back();
      }
    };
    visit(visit);
    sets += local;
  });
  s.exhaustive_sets = sets.load();
  s.exhaustive_seconds = Seconds(t0);

  std::mt19937_64 seeds(kSeed);
  std::vector<uint64_t> inst_seeds(kRandomRuleInstances);
  for (auto& x : inst_seeds) x = seeds();
  ParallelFor(kRandomRuleInstances, [&](int64_t i) {
    std::mt19937_64 rng(inst_seeds[i]);
    const CprTensor t = RandomInput(rng, {kRandomRuleGrid, kRandomRuleGrid},
                                    UniformDensity(rng), 1);
    check(t.coords());
  });
  s.random_sets = kRandomRuleInstances;
  s.mismatches = bad.load();
  s.monotone_violations = nonmono.load();
  s.seconds = Seconds(t0);
  return s;
}

// ---------------------------------------------------------------------------
// AC2: bit-exact layers against the dense oracle path.

struct RandomLayer {
  CprTensor input;
  LayerSpec layer;
  ReferenceOptions ref;
};

RandomLayer MakeRandomLayer(std::mt19937_64& rng, const ConvVariant& base,
                            const std::vector<int32_t>& channel_choices,
                            int32_t max_grid) {
  RandomLayer r;
  const GridDims dims{static_cast<int32_t>(4 + rng() % (max_grid - 3)),
                      static_cast<int32_t>(4 + rng() % (max_grid - 3))};
  const int32_t C = channel_choices[rng() % channel_choices.size()];
  const int32_t M = channel_choices[rng() % channel_choices.size()];
  r.input = RandomInput(rng, dims, UniformDensity(rng), C);
  LayerSpec& l = r.layer;
  l.name = std::string(base.name());
  l.variant = base;
  l.in_channels = C;
  l.out_channels = M;
  l.weights = RandomWeights(rng, base.kernel_positions(), C, M);
  l.requant.shift = static_cast<int32_t>(rng() % 16);
  l.prune_after_requant = (rng() % 2) == 1;
  l.representative = static_cast<RepresentativeKind>(rng() % 3);
  if (base.kind() == ConvVariant::Kind::kSpConvP) {
    // Threshold = representative of a random unpruned output, so a
    // nontrivial share of outputs falls on either side.
    LayerSpec probe = l;
    probe.variant = ConvVariant::SpConv();
    const LayerResult lr = RunLayer(r.input, probe, TileCapacity{});
    double th = 0.0;
    if (lr.accumulators.pillar_count() > 0) {
      const CprTensor& src = l.prune_after_requant ? lr.output : lr.accumulators;
      th = RepresentativeValue(src.feature(static_cast<int32_t>(
                                   rng() % src.pillar_count())),
                               l.representative);
    }
    l.variant = ConvVariant::SpConvP(th);
  }
  r.ref.requant = l.requant;
  r.ref.prune_after_requant = l.prune_after_requant;
  r.ref.representative = l.representative;
  return r;
}

Verdict CheckExactLayers() {
  std::mt19937_64 seeds(kSeed + 2);
  std::vector<uint64_t> s(kExactLayers);
  for (auto& x : s) x = seeds();
  std::atomic<int64_t> bad{0}, outputs{0}, pruned{0};
  ParallelFor(kExactLayers, [&](int64_t i) {
    std::mt19937_64 rng(s[i]);
    const RandomLayer r = MakeRandomLayer(rng, kVariants[i % 5], {4, 16, 64}, 32);
    const CprTensor ref =
        ReferenceLayer(r.input, r.layer.weights, r.layer.variant, r.ref);
    const RuleSet rules = GenerateRules(r.input.coords(), r.layer.variant);
    const TileCapacity minimal = MinimalCapacities(rules);
    const TileCapacity caps{minimal.cap_in + static_cast<int32_t>(rng() % 64),
                            minimal.cap_out + static_cast<int32_t>(rng() % 128)};
    const LayerResult lr = RunLayer(r.input, r.layer, caps);
    if (!(lr.output == ref)) ++bad;
    outputs += lr.output.pillar_count();
    pruned += lr.stats.pillars_pruned;
  });
  Verdict v;
  v.pass = bad == 0;
  v.detail = std::to_string(kExactLayers) + " layers (C,M in {4,16,64}, all 5 " +
             "variants), " + std::to_string(bad.load()) + " mismatches, " +
             std::to_string(outputs.load()) + " output pillars compared, " +
             std::to_string(pruned.load()) + " pruned";
  return v;
}

// ---------------------------------------------------------------------------
// AC4: mapping cost.

Verdict CheckMappingCost() {
  std::vector<int64_t> ps;
  for (int64_t p = 1000; p <= 100000; p += 1000) ps.push_back(p);
  const RulegenComparison c = CompareRulegen(ps, 0.1, {kSeed});
  int64_t not_min = 0;
  for (const auto& row : c.rows) {
    if (row.pillars < kMinRguComparePillars) continue;
    if (!(row.rgu_cycles < row.hash_cycles && row.rgu_cycles < row.sort_cycles))
      ++not_min;
  }
  Verdict v;
  v.pass = c.rgu_r2 >= kMinR2 && not_min == 0 &&
           c.mean_hash_ratio >= kHashRatioLo && c.mean_hash_ratio <= kHashRatioHi &&
           c.mean_sort_ratio >= kSortRatioLo && c.mean_sort_ratio <= kSortRatioHi;
  v.detail = "P=1k..100k: R2 " + Fmt("%.6f", c.rgu_r2) + " (>= 0.999), RGU not minimal at " +
             std::to_string(not_min) + " points, hash/RGU " +
             Fmt("%.2f", c.mean_hash_ratio) + " in [3,12], sort/RGU " +
             Fmt("%.2f", c.mean_sort_ratio) + " in [2,8]";
  return v;
}

// ---------------------------------------------------------------------------
// AC5: full reuse and gather DRAM efficiency.

struct ReuseCheck {
  bool single_fetch = true;
  double dram_ratio = 0.0;  // modeled gather cycles / bandwidth bound
};

ReuseCheck CheckReuseOn(const LayerSpec& layer, const CprTensor& input,
                        const HwConfig& hw) {
  ReuseCheck rc;
  const RuleSet rules = GenerateRules(input.coords(), layer.variant);
  const TileConfig tc = OptimizeTiles(layer, rules, hw);
  const Trace tr = EmitTrace(layer, rules, tc, {}, hw);
  const auto tiles = PlanTiles(rules, tc.t_a, hw.buf_out);
  // (tile, m_tile, c_tile) -> pillars gathered.
  std::map<std::tuple<int, int, int>, int64_t> gathered;
  int64_t bytes = 0, cycles = 0;
  for (const Instruction& in : tr.instrs) {
    if (in.kind != InstrKind::kGatherInp) continue;
    auto key = std::make_tuple(in.tile, in.m_tile, in.c_tile);
    if (gathered.contains(key)) rc.single_fetch = false;
    gathered[key] += in.rows;
    bytes += in.bytes;
    cycles += DramCycles(in.bytes,
                         in.strided ? AccessPattern::kStrided : AccessPattern::kContiguous,
                         in.elements, hw);
  }
  const int m_tiles = (layer.out_channels + tc.t_m - 1) / tc.t_m;
  const int c_tiles = (layer.in_channels + tc.t_c - 1) / tc.t_c;
  for (int m = 0; m < m_tiles; ++m) {
    for (int c = 0; c < c_tiles; ++c) {
      int64_t total = 0;
      for (size_t t = 0; t < tiles.size(); ++t) {
        const auto it = gathered.find({static_cast<int>(t), m, c});
        const int64_t rows = it == gathered.end() ? 0 : it->second;
        if (rows != tiles[t].input_count()) rc.single_fetch = false;
        total += rows;
      }
      if (total != input.pillar_count()) rc.single_fetch = false;
    }
  }
  const LayerResult lr = RunLayer(input, layer, {tc.t_a, hw.buf_out});
  if (lr.stats.max_gathers_per_input != 1) rc.single_fetch = false;
  rc.dram_ratio = static_cast<double>(cycles) /
                  (static_cast<double>(bytes) / hw.dram_bandwidth);
  return rc;
}

Verdict CheckFullReuse() {
  struct Case {
    HwConfig hw;
    int64_t pillars;
    int32_t C, M;
  };
  const std::vector<Case> cases = {{HwConfig::HighEnd(), 2048, 64, 64},
                                   {HwConfig::HighEnd(), 16384, 64, 64},
                                   {HwConfig::HighEnd(), 8192, 128, 128},
                                   {HwConfig::LowEnd(), 8192, 64, 64}};
  bool single = true;
  double worst = 0.0;
  for (const Case& c : cases) {
    const ReuseCheck rc =
        CheckReuseOn(BenchLayer(ConvVariant::SpConv(), c.C, c.M),
                     BenchmarkInput(kBevGrid, c.pillars, c.C), c.hw);
    single = single && rc.single_fetch;
    worst = std::max(worst, rc.dram_ratio);
  }
  Verdict v;
  v.pass = single && worst <= 1.0 + kGatherDramSlack;
  v.detail = std::string("SpConv on HE/LE, 4 layers: single fetch per output-channel tile ") +
             (single ? "holds" : "VIOLATED") + ", worst gather DRAM / bound " +
             Fmt("%.4f", worst) + " (<= 1.01)";
  return v;
}

// ---------------------------------------------------------------------------
// AC6: tiling independence.

Verdict CheckTilingIndependence() {
  std::mt19937_64 seeds(kSeed + 6);
  std::vector<uint64_t> s(kTilingLayers);
  for (auto& x : s) x = seeds();
  std::atomic<int64_t> bad{0}, carried{0};
  ParallelFor(kTilingLayers, [&](int64_t i) {
    std::mt19937_64 rng(s[i]);
    const RandomLayer r = MakeRandomLayer(rng, kVariants[i % 5], {1, 3, 8, 16}, 48);
    const RuleSet rules = GenerateRules(r.input.coords(), r.layer.variant);
    const TileCapacity minimal = MinimalCapacities(rules);
    const TileCapacity random{
        minimal.cap_in + static_cast<int32_t>(rng() % 64),
        minimal.cap_out + static_cast<int32_t>(rng() % 128)};
    const LayerResult a = RunLayer(r.input, r.layer, minimal);
    const LayerResult b = RunLayer(r.input, r.layer, random);
    const LayerResult c = RunLayer(r.input, r.layer, TileCapacity{});
    if (!(a.output == c.output) || !(b.output == c.output) ||
        !(a.accumulators == c.accumulators))
      ++bad;
    carried += a.stats.psum_carried;
  });
  Verdict v;
  v.pass = bad == 0 && carried > 0;
  v.detail = std::to_string(kTilingLayers) +
             " layers x {minimal, random, unbounded}: " + std::to_string(bad.load()) +
             " differences; " + std::to_string(carried.load()) +
             " boundary psums carried under minimal capacities";
  return v;
}

// ---------------------------------------------------------------------------
// AC7-AC9: simulator benchmarks.

SimStats SimulateOptimized(const LayerSpec& layer, const RuleSet& rules,
                           const TraceOptions& opts, const HwConfig& hw,
                           Trace* trace_out = nullptr) {
  const TileConfig tc = OptimizeTiles(layer, rules, hw, opts);
  Trace tr = EmitTrace(layer, rules, tc, opts, hw);
  const SimStats st = SimulateTrace(tr, hw);
  if (trace_out) *trace_out = std::move(tr);
  return st;
}

Verdict CheckUtilization() {
  const HwConfig hw = HwConfig::HighEnd();
  const LayerSpec layer = BenchLayer(ConvVariant::SpConv(), 64, 64);
  bool pass = true;
  std::string detail = "SpConv C=M=64 on HE, optimized tiles:";
  for (int64_t p : kUtilPillars) {
    const CprTensor in = BenchmarkInput(kBevGrid, p, 64);
    const RuleSet rules = GenerateRules(in.coords(), layer.variant);
    const SimStats st = SimulateOptimized(layer, rules, {}, hw);
    pass = pass && st.utilization() >= kMinUtilization;
    detail += " P=" + std::to_string(p) + " util " + Fmt("%.3f", st.utilization());
  }
  return {pass, detail + " (>= 0.90 each)"};
}

Verdict CheckWeightGrouping() {
  const HwConfig hw = HwConfig::HighEnd();
  const LayerSpec layer = BenchLayer(ConvVariant::SpStConv(), 64, 64);
  const CprTensor in = BenchmarkInput(kBevGrid, kStridedPillars, 64);
  const RuleSet rules = GenerateRules(in.coords(), layer.variant);
  TraceOptions grouped;
  grouped.weight_grouping = true;
  Trace t_plain, t_grouped;
  const SimStats plain = SimulateOptimized(layer, rules, {}, hw, &t_plain);
  const SimStats group = SimulateOptimized(layer, rules, grouped, hw, &t_grouped);
  auto gathers_per_tile = [](const Trace& t) {
    std::map<std::tuple<int, int, int>, int> n;
    for (const Instruction& in : t.instrs)
      if (in.kind == InstrKind::kGatherInp) ++n[{in.tile, in.m_tile, in.c_tile}];
    int lo = 1 << 30, hi = 0;
    for (const auto& [k, c] : n) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    return std::make_pair(lo, hi);
  };
  const auto gp = gathers_per_tile(t_plain);
  const auto gg = gathers_per_tile(t_grouped);
  const double ratio = group.stall_share() / plain.stall_share();
  Verdict v;
  v.pass = gp.first == 9 && gp.second == 9 && gg.first == 4 && gg.second == 4 &&
           ratio <= kMaxStallShareRatio;
  v.detail = "SpStConv P=" + std::to_string(kStridedPillars) +
             " C=M=64 on HE: gathers/tile " + std::to_string(gp.second) + " -> " +
             std::to_string(gg.second) + ", stall share " +
             Fmt("%.3f", plain.stall_share()) + " -> " + Fmt("%.3f", group.stall_share()) +
             " (ratio " + Fmt("%.3f", ratio) + ", <= 0.60)";
  return v;
}

Verdict CheckGangedScatter() {
  const HwConfig hw = HwConfig::HighEnd();
  const LayerSpec layer = BenchLayer(ConvVariant::SpDeconv(), 256, 128);
  const CprTensor in = BenchmarkInput(kDeconvGrid, kDeconvPillars, 256);
  const RuleSet rules = GenerateRules(in.coords(), layer.variant);
  TraceOptions ganged;
  ganged.ganged_scatter = true;
  Trace t_ganged;
  const SimStats plain = SimulateOptimized(layer, rules, {}, hw);
  const SimStats gang = SimulateOptimized(layer, rules, ganged, hw, &t_ganged);
  const int m_tiles = (layer.out_channels + t_ganged.tiles.t_m - 1) / t_ganged.tiles.t_m;
  int64_t scattered = 0;
  for (const Instruction& i : t_ganged.instrs)
    if (i.kind == InstrKind::kScatterOut) scattered += i.rows;
  const bool once = scattered == int64_t{rules.num_outputs()} * m_tiles &&
                    gang.psum_copies == 0 && gang.rmw_ops == 0;
  const double ratio = gang.stall_share() / plain.stall_share();
  Verdict v;
  v.pass = once && ratio <= kMaxStallShareRatio;
  v.detail = "SpDeconv P=" + std::to_string(in.pillar_count()) +
             " C=256 M=128 on HE: outputs written once per m-tile " +
             (once ? "yes" : "NO") + ", psum copies " + std::to_string(gang.psum_copies) +
             ", stall share " + Fmt("%.3f", plain.stall_share()) + " -> " +
             Fmt("%.3f", gang.stall_share()) + " (ratio " + Fmt("%.3f", ratio) +
             ", <= 0.60)";
  return v;
}

// ---------------------------------------------------------------------------
// AC10-AC11: network-level trends.

ordered_json RunTrend(const std::string& file, double density, bool simulate) {
  ScenarioConfig cfg;
  cfg.network = LoadNetworkSpec(std::string(PF_NETWORKS_DIR) + "/" + file);
  cfg.network_label = file;
  cfg.synthetic.density = density;
  cfg.simulate = simulate;
  cfg.dense_compare = simulate;
  return RunScenario(cfg);
}

std::vector<double> Densities(const ordered_json& r) {
  std::vector<double> d;
  for (const auto& l : r.at("layers")) d.push_back(l.at("density_out").get<double>());
  return d;
}

Verdict CheckSparsityTrends() {
  bool flat = true, growing = true, between = true;
  std::string detail;
  for (double density : kTrendDensities) {
    const ordered_json s = RunTrend("trend_spconvs.json", density, false);
    const ordered_json c = RunTrend("trend_spconv.json", density, false);
    const ordered_json p = RunTrend("trend_spconvp.json", density, false);
    for (const auto& l : s.at("layers"))
      flat = flat && l.at("out_in_ratio").get<double>() == 1.0;
    const auto ds = Densities(s), dc = Densities(c), dp = Densities(p);
    double prev = c.at("input").at("density").get<double>();
    for (double d : dc) {
      growing = growing && d >= prev;
      prev = d;
    }
    for (size_t i = 0; i < dp.size(); ++i)
      between = between && ds[i] <= dp[i] && dp[i] <= dc[i];
    between = between && ds.back() < dp.back() && dp.back() < dc.back();
    detail += " d=" + Fmt("%.2f", density) + ": last-layer density S " +
              Fmt("%.3f", ds.back()) + " / P " + Fmt("%.3f", dp.back()) + " / SpConv " +
              Fmt("%.3f", dc.back()) + ";";
  }
  Verdict v;
  v.pass = flat && growing && between;
  v.detail = std::string("6-layer networks on 496x432: S ratio=1 ") + (flat ? "yes" : "NO") +
             ", SpConv density non-decreasing " + (growing ? "yes" : "NO") +
             ", P between " + (between ? "yes" : "NO") + ";" + detail;
  return v;
}

Verdict CheckEnergyTrend() {
  const ordered_json r = RunTrend("trend_spconvs.json", 0.05, true);
  double worst_compute = 0.0, worst_sram = 0.0;
  bool dram_lags = true;
  for (const auto& l : r.at("layers")) {
    const double ops = l.at("savings").at("ops").get<double>();
    const auto& e = l.at("savings").at("energy");
    worst_compute = std::max(worst_compute,
                             std::abs(e.at("compute").get<double>() / ops - 1.0));
    worst_sram =
        std::max(worst_sram, std::abs(e.at("sram").get<double>() / ops - 1.0));
    dram_lags = dram_lags && e.at("dram").get<double>() <= ops;
  }
  const auto& t = r.at("totals");
  Verdict v;
  v.pass = worst_compute <= kEnergyOpsTolerance && worst_sram <= kEnergyOpsTolerance &&
           dram_lags;
  v.detail = "SpConvS network, HE, density 0.05: ops savings " +
             Fmt("%.2f", t.at("ops_savings").get<double>()) + "x, compute " +
             Fmt("%.2f", t.at("energy_savings").at("compute").get<double>()) + "x, SRAM " +
             Fmt("%.2f", t.at("energy_savings").at("sram").get<double>()) + "x, DRAM " +
             Fmt("%.2f", t.at("energy_savings").at("dram").get<double>()) +
             "x; worst deviation compute " + Fmt("%.1f%%", 100 * worst_compute) +
             " SRAM " + Fmt("%.1f%%", 100 * worst_sram) + " (<= 5%), DRAM <= ops " +
             (dram_lags ? "yes" : "NO");
  return v;
}

}  // namespace

// With no arguments every criterion runs; otherwise only the listed ones
// (e.g. `acceptance 7 8 9`).
int main(int argc, char** argv) {
  std::vector<bool> want(12, argc == 1);
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 11) {
      std::fprintf(stderr, "usage: %s [criterion 1-11 ...]\n", argv[0]);
      return 64;
    }
    want[id] = true;
  }
  std::printf("pillarflow acceptance suite (%d worker threads)\n", Workers());
  std::fflush(stdout);
  RuleSuite rs;
  if (want[1] || want[3]) rs = RunRuleSuite();
  if (want[1])
    Print(1, "rule oracle equivalence",
          {rs.mismatches == 0 && rs.seconds < kMaxRuleSuiteSeconds,
           std::to_string(rs.exhaustive_sets) + " exhaustive subsets (<=5 on 8x8) + " +
               std::to_string(rs.random_sets) + " random 64x64 instances, x5 variants: " +
               std::to_string(rs.mismatches) + " mismatches in " +
               Fmt("%.1f s", rs.seconds) + " (exhaustive " +
               Fmt("%.1f s", rs.exhaustive_seconds) + "; < 60 s)"});
  if (want[2]) Print(2, "numerical exactness", CheckExactLayers());
  if (want[3])
    Print(3, "rule stream monotonicity",
          {rs.monotone_violations == 0,
           std::to_string(rs.monotone_violations) + " violations over " +
               std::to_string(5 * (rs.exhaustive_sets + rs.random_sets)) + " rule sets"});
  if (want[4]) Print(4, "linear-time mapping", CheckMappingCost());
  if (want[5]) Print(5, "full input reuse", CheckFullReuse());
  if (want[6]) Print(6, "tiling independence", CheckTilingIndependence());
  if (want[7]) Print(7, "MXU utilization", CheckUtilization());
  if (want[8]) Print(8, "weight grouping", CheckWeightGrouping());
  if (want[9]) Print(9, "ganged scatter", CheckGangedScatter());
  if (want[10]) Print(10, "sparsity trends", CheckSparsityTrends());
  if (want[11]) Print(11, "energy trend", CheckEnergyTrend());
  std::printf("acceptance summary: %d criteria evaluated, %d passed, %d failed\n",
              g_evaluated, g_evaluated - g_failed, g_failed);
  return g_failed;
}
