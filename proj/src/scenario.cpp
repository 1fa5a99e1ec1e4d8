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

#include "pillarflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "pillarflow/oracle.hpp"
#include "pillarflow/serialize.hpp"

namespace pillarflow {
namespace {

using nlohmann::ordered_json;

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

double Ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct LayerSim {
  TileConfig tiles;
  SimStats stats;
};

LayerSim SimulateLayer(const LayerSpec& spec, const RuleSet& rules,
                       const TraceOptions& opts, const HwConfig& hw) {
  LayerSim out;
  out.tiles = OptimizeTiles(spec, rules, hw, opts);
  out.stats = SimulateTrace(EmitTrace(spec, rules, out.tiles, opts, hw), hw);
  return out;
}

// Dense-equivalent accelerator run: every cell active, widest channel tiles,
// the largest pillar tile that fits the buffers.
LayerSim SimulateDenseLayer(const LayerSpec& spec, GridDims in_dims,
                            const TraceOptions& opts, const HwConfig& hw) {
  std::vector<Coord> all;
  all.reserve(static_cast<size_t>(in_dims.cells()));
  for (int32_t r = 0; r < in_dims.height; ++r)
    for (int32_t c = 0; c < in_dims.width; ++c) all.push_back({r, c});
  const RuleSet rules =
      GenerateRules(CprCoords::FromSorted(in_dims, all), spec.variant);
  TraceOptions dense_opts = opts;
  dense_opts.output_kept.clear();
  LayerSim out;
  out.tiles = {std::min(spec.out_channels, hw.pe_cols),
               std::min(spec.in_channels, hw.pe_rows),
               std::max(1, std::min(hw.buf_in, rules.num_inputs))};
  while (true) {
    try {
      out.stats = SimulateTrace(EmitTrace(spec, rules, out.tiles, dense_opts, hw), hw);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidTileConfig || out.tiles.t_a == 1) throw;
      out.tiles.t_a /= 2;
    }
  }
}

std::vector<uint8_t> KeptMask(const RuleSet& rules, const CprTensor& output) {
  std::vector<uint8_t> kept(rules.num_outputs(), 0);
  for (const Coord& c : output.coords().ToList()) {
    const int32_t i = rules.out_coords.Find(c.row, c.col);
    if (i >= 0) kept[i] = 1;
  }
  return kept;
}

ordered_json TilesToJson(const TileConfig& t) {
  return {{"t_m", t.t_m}, {"t_c", t.t_c}, {"t_a", t.t_a}};
}

ordered_json EnergyToJson(const EnergyBreakdown& e) {
  return {{"compute", e.compute},
          {"sram", e.sram},
          {"dram", e.dram},
          {"total", e.total()}};
}

ordered_json SavingsToJson(const EnergyBreakdown& dense,
                           const EnergyBreakdown& sparse) {
  return {{"compute", Ratio(dense.compute, sparse.compute)},
          {"sram", Ratio(dense.sram, sparse.sram)},
          {"dram", Ratio(dense.dram, sparse.dram)},
          {"total", Ratio(dense.total(), sparse.total())}};
}

void Accumulate(EnergyBreakdown& acc, const EnergyBreakdown& e) {
  acc.compute += e.compute;
  acc.sram += e.sram;
  acc.dram += e.dram;
}

NetworkSpec ApplyThreshold(NetworkSpec net, double threshold) {
  if (threshold < 0) return net;
  for (auto& l : net.layers) {
    if (!l.is_concat && l.spec.variant.kind() == ConvVariant::Kind::kSpConvP)
      l.spec.variant = ConvVariant::SpConvP(threshold);
  }
  return net;
}

}  // namespace

CprTensor GenSyntheticPillars(GridDims dims, int32_t channels, double density,
                              int32_t cluster_count, double cluster_radius,
                              uint64_t seed) {
  PF_CHECK(density > 0.0 && density <= 1.0, ErrorCode::kInvalidDensity,
           "density must lie in (0, 1]");
  PF_CHECK(dims.height > 0 && dims.width > 0, ErrorCode::kInvalidArgument,
           "grid must be non-empty");
  PF_CHECK(channels > 0, ErrorCode::kInvalidArgument, "channels must be > 0");
  PF_CHECK(cluster_count >= 1 && cluster_count <= dims.cells(),
           ErrorCode::kInvalidArgument, "cluster_count must lie in [1, cells]");
  PF_CHECK(cluster_radius >= 0.0, ErrorCode::kInvalidArgument,
           "cluster_radius must be >= 0");
  std::mt19937_64 rng(seed);
  const int64_t cells = dims.cells();
  std::uniform_int_distribution<int64_t> cell(0, cells - 1);
  std::set<int64_t> centers;
  while (static_cast<int32_t>(centers.size()) < cluster_count)
    centers.insert(cell(rng));
  const std::vector<int64_t> center_list(centers.begin(), centers.end());

  std::set<Coord> active;
  if (cluster_radius == 0.0) {
    for (int64_t c : center_list)
      active.insert({static_cast<int32_t>(c / dims.width),
                     static_cast<int32_t>(c % dims.width)});
  } else {
    const int64_t target = std::max<int64_t>(
        1, static_cast<int64_t>(std::llround(density * static_cast<double>(cells))));
    std::uniform_int_distribution<size_t> pick(0, center_list.size() - 1);
    std::normal_distribution<double> offset(0.0, cluster_radius);
    // Saturated clusters stop producing new cells; the remainder is spread
    // uniformly so the target count is always reached.
    int64_t misses = 0;
    while (static_cast<int64_t>(active.size()) < target) {
      if (misses > 64 * target + 1024) {
        const int64_t c = cell(rng);
        active.insert({static_cast<int32_t>(c / dims.width),
                       static_cast<int32_t>(c % dims.width)});
        continue;
      }
      const int64_t c = center_list[pick(rng)];
      const int32_t r = static_cast<int32_t>(c / dims.width) +
                        static_cast<int32_t>(std::lround(offset(rng)));
      const int32_t col = static_cast<int32_t>(c % dims.width) +
                          static_cast<int32_t>(std::lround(offset(rng)));
      if (!dims.Contains(r, col) || !active.insert({r, col}).second) ++misses;
    }
  }
  const std::vector<Coord> sorted(active.begin(), active.end());
  std::uniform_int_distribution<int32_t> feat(-128, 127);
  std::vector<int32_t> features(sorted.size() * static_cast<size_t>(channels));
  for (auto& f : features) f = feat(rng);
  return CprTensor(CprCoords::FromSorted(dims, sorted), channels,
                   Precision::kInt8, std::move(features));
}

ordered_json RunScenario(const ScenarioConfig& cfg) {
  const NetworkSpec net = ApplyThreshold(cfg.network, cfg.threshold_override);
  net.Validate();
  cfg.hw.Validate();
  const CprTensor input =
      cfg.input_path.empty()
          ? GenSyntheticPillars(net.grid, net.in_channels, cfg.synthetic.density,
                                cfg.synthetic.cluster_count,
                                cfg.synthetic.cluster_radius, cfg.synthetic.seed)
          : LoadCpr(cfg.input_path);
  PF_CHECK(input.dims() == net.grid && input.channels() == net.in_channels,
           ErrorCode::kShapeMismatch,
           "input tensor does not match the network grid/in_channels");
  const NetworkResult res = RunNetwork(net, input);

  ordered_json report;
  report["network"] = cfg.network_label;
  report["hw"] = HwConfigToJson(cfg.hw);
  ordered_json in;
  if (cfg.input_path.empty()) {
    in["source"] = "synthetic";
    in["seed"] = cfg.synthetic.seed;
    in["target_density"] = cfg.synthetic.density;
    in["cluster_count"] = cfg.synthetic.cluster_count;
    in["cluster_radius"] = cfg.synthetic.cluster_radius;
  } else {
    in["source"] = "file";
    in["path"] = cfg.input_path;
  }
  in["grid"] = {net.grid.height, net.grid.width};
  in["pillars"] = input.pillar_count();
  in["density"] = Ratio(static_cast<double>(input.pillar_count()),
                        static_cast<double>(net.grid.cells()));
  report["input"] = std::move(in);
  report["options"] = {{"weight_grouping", cfg.weight_grouping},
                       {"ganged_scatter", cfg.ganged_scatter},
                       {"simulate", cfg.simulate},
                       {"dense_compare", cfg.dense_compare},
                       {"threshold_override", cfg.threshold_override},
                       {"energy_units",
                        {{"e_mac", cfg.energy.e_mac},
                         {"e_sram", cfg.energy.e_sram},
                         {"e_dram", cfg.energy.e_dram}}}};

  ordered_json layers = ordered_json::array();
  int64_t macs = 0, dense_macs = 0, cycles = 0, busy = 0, dense_cycles = 0;
  EnergyBreakdown e_sparse, e_dense;
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const NetworkLayer& nl = net.layers[li];
    const LayerReport& rep = res.layers[li];
    ordered_json lj;
    lj["name"] = rep.name;
    lj["variant"] = rep.variant;
    lj["out_grid"] = {rep.out_dims.height, rep.out_dims.width};
    lj["active_in"] = rep.active_in;
    lj["active_out"] = rep.active_out;
    lj["density_in"] = rep.density_in;
    lj["density_out"] = rep.density_out;
    lj["out_in_ratio"] = Ratio(static_cast<double>(rep.active_out),
                               static_cast<double>(rep.active_in));
    if (nl.is_concat) {
      layers.push_back(std::move(lj));
      continue;
    }
    lj["in_channels"] = nl.spec.in_channels;
    lj["out_channels"] = nl.spec.out_channels;
    if (nl.spec.variant.kind() == ConvVariant::Kind::kSpConvP)
      lj["threshold"] = nl.spec.prune_threshold();
    lj["ops"] = OpStatsToJson(rep.stats);
    macs += rep.stats.macs_performed;
    dense_macs += rep.stats.dense_macs_equivalent;

    if (cfg.simulate) {
      const RuleSet& rules = res.rules[li];
      TraceOptions opts;
      opts.weight_grouping = cfg.weight_grouping;
      opts.ganged_scatter = cfg.ganged_scatter;
      opts.output_kept = KeptMask(rules, res.outputs[li]);
      const LayerSim sim = SimulateLayer(nl.spec, rules, opts, cfg.hw);
      const EnergyBreakdown e = ComputeEnergy(sim.stats, cfg.energy);
      Accumulate(e_sparse, e);
      cycles += sim.stats.total_cycles;
      busy += sim.stats.mxu_busy_cycles;
      lj["sim"] = {{"tiles", TilesToJson(sim.tiles)},
                   {"stats", SimStatsToJson(sim.stats, cfg.energy)}};
      if (cfg.dense_compare) {
        const GridDims in_dims = rules.in_dims;
        const LayerSim dense = SimulateDenseLayer(nl.spec, in_dims, opts, cfg.hw);
        const EnergyBreakdown ed = ComputeEnergy(dense.stats, cfg.energy);
        Accumulate(e_dense, ed);
        dense_cycles += dense.stats.total_cycles;
        lj["dense"] = {{"tiles", TilesToJson(dense.tiles)},
                       {"stats", SimStatsToJson(dense.stats, cfg.energy)}};
        lj["savings"] = {
            {"ops", rep.stats.ops_savings()},
            {"cycles", Ratio(static_cast<double>(dense.stats.total_cycles),
                             static_cast<double>(sim.stats.total_cycles))},
            {"energy", SavingsToJson(ed, e)}};
      }
    }
    layers.push_back(std::move(lj));
  }
  report["layers"] = std::move(layers);

  ordered_json totals;
  totals["macs_performed"] = macs;
  totals["dense_macs_equivalent"] = dense_macs;
  totals["ops_savings"] = Ratio(static_cast<double>(dense_macs),
                                static_cast<double>(macs));
  if (cfg.simulate) {
    totals["cycles"] = cycles;
    totals["mxu_busy_cycles"] = busy;
    totals["utilization"] = Ratio(static_cast<double>(busy),
                                  static_cast<double>(cycles));
    totals["energy"] = EnergyToJson(e_sparse);
    if (cfg.dense_compare) {
      totals["dense_cycles"] = dense_cycles;
      totals["dense_energy"] = EnergyToJson(e_dense);
      totals["energy_savings"] = SavingsToJson(e_dense, e_sparse);
    }
  }
  report["totals"] = std::move(totals);
  ordered_json heads = ordered_json::array();
  for (size_t h = 0; h < res.heads.size(); ++h)
    heads.push_back({{"name", res.head_names[h]},
                     {"pillars", res.heads[h].pillar_count()},
                     {"channels", res.heads[h].channels()}});
  report["heads"] = std::move(heads);
  report["timestamp"] = Timestamp();
  return report;
}

ordered_json RunSweep(const ScenarioConfig& base, const SweepConfig& sweep) {
  struct Point {
    double density;
    double threshold;
    uint64_t seed;
  };
  const std::vector<double> densities =
      sweep.densities.empty() ? std::vector<double>{base.synthetic.density}
                              : sweep.densities;
  const std::vector<double> thresholds =
      sweep.thresholds.empty() ? std::vector<double>{base.threshold_override}
                               : sweep.thresholds;
  const std::vector<uint64_t> seeds =
      sweep.seeds.empty() ? std::vector<uint64_t>{base.synthetic.seed}
                          : sweep.seeds;
  std::vector<Point> points;
  for (double d : densities)
    for (double t : thresholds)
      for (uint64_t s : seeds) points.push_back({d, t, s});

  std::vector<ordered_json> rows(points.size());
  std::vector<std::string> errors(points.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < points.size(); i = next++) {
      ScenarioConfig cfg = base;
      cfg.synthetic.density = points[i].density;
      cfg.synthetic.seed = points[i].seed;
      cfg.threshold_override = points[i].threshold;
      try {
        const ordered_json r = RunScenario(cfg);
        const ordered_json& t = r.at("totals");
        ordered_json row;
        row["density"] = points[i].density;
        row["threshold"] = points[i].threshold;
        row["seed"] = points[i].seed;
        row["pillars"] = r.at("input").at("pillars");
        row["macs_performed"] = t.at("macs_performed");
        row["dense_macs_equivalent"] = t.at("dense_macs_equivalent");
        row["ops_savings"] = t.at("ops_savings");
        if (t.contains("cycles")) {
          row["cycles"] = t.at("cycles");
          row["utilization"] = t.at("utilization");
          row["energy_total"] = t.at("energy").at("total");
        }
        if (t.contains("energy_savings"))
          row["energy_savings"] = t.at("energy_savings").at("total");
        ordered_json dens = ordered_json::array();
        for (const auto& l : r.at("layers")) dens.push_back(l.at("density_out"));
        row["layer_density_out"] = std::move(dens);
        rows[i] = std::move(row);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int hw_threads = static_cast<int>(std::thread::hardware_concurrency());
  const int n = std::max(1, std::min<int>(sweep.threads > 0 ? sweep.threads
                                                              : std::max(1, hw_threads),
                                          static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty())
      throw Error(ErrorCode::kInvalidArgument,
                  "sweep point " + std::to_string(i) + ": " + errors[i]);
  }
  ordered_json out;
  out["network"] = base.network_label;
  out["hw"] = base.hw.name;
  out["points"] = rows;
  out["timestamp"] = Timestamp();
  return out;
}

std::string SweepToCsv(const ordered_json& sweep) {
  std::ostringstream out;
  out << "density,threshold,seed,pillars,macs_performed,dense_macs_equivalent,"
         "ops_savings,cycles,utilization,energy_savings\n";
  auto field = [](const ordered_json& row, const char* key) {
    return row.contains(key) ? row.at(key).dump() : std::string();
  };
  for (const auto& row : sweep.at("points")) {
    out << field(row, "density") << ',' << field(row, "threshold") << ','
        << field(row, "seed") << ',' << field(row, "pillars") << ','
        << field(row, "macs_performed") << ','
        << field(row, "dense_macs_equivalent") << ','
        << field(row, "ops_savings") << ',' << field(row, "cycles") << ','
        << field(row, "utilization") << ',' << field(row, "energy_savings")
        << '\n';
  }
  return out.str();
}

double LinearFitR2(const std::vector<double>& x, const std::vector<double>& y) {
  PF_CHECK(x.size() == y.size() && x.size() >= 2, ErrorCode::kInvalidArgument,
           "linear fit needs at least two paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

RulegenComparison CompareRulegen(const std::vector<int64_t>& pillar_counts,
                                 double density,
                                 const std::vector<uint64_t>& seeds,
                                 const RuleGenCostConfig& cfg) {
  PF_CHECK(density > 0.0 && density <= 1.0, ErrorCode::kInvalidDensity,
           "density must lie in (0, 1]");
  PF_CHECK(!seeds.empty(), ErrorCode::kInvalidArgument, "need at least one seed");
  RulegenComparison out;
  out.density = density;
  for (int64_t P : pillar_counts) {
    PF_CHECK(P >= 1, ErrorCode::kInvalidArgument, "pillar counts must be >= 1");
    const int32_t side = static_cast<int32_t>(
        std::ceil(std::sqrt(static_cast<double>(P) / density)));
    const GridDims dims{side, side};
    RulegenComparisonRow row;
    row.pillars = P;
    for (uint64_t seed : seeds) {
      std::mt19937_64 rng(seed * 7919 + static_cast<uint64_t>(P));
      std::uniform_int_distribution<int64_t> cell(0, dims.cells() - 1);
      std::set<Coord> s;
      while (static_cast<int64_t>(s.size()) < P) {
        const int64_t c = cell(rng);
        s.insert({static_cast<int32_t>(c / side), static_cast<int32_t>(c % side)});
      }
      const std::vector<Coord> sorted(s.begin(), s.end());
      const CprCoords coords = CprCoords::FromSorted(dims, sorted);
      const RuleSet rules = GenerateRules(coords, ConvVariant::SpConv());
      row.rgu_cycles += static_cast<double>(RguCycles(rules, cfg));
      row.hash_cycles += static_cast<double>(
          HashBaselineCycles(coords, ConvVariant::SpConv(), cfg).cycles);
      row.sort_cycles += static_cast<double>(MergeSortBaselineCycles(P, cfg));
    }
    const double n = static_cast<double>(seeds.size());
    row.rgu_cycles /= n;
    row.hash_cycles /= n;
    row.sort_cycles /= n;
    out.rows.push_back(row);
  }
  std::vector<double> xs, ys;
  for (const auto& r : out.rows) {
    xs.push_back(static_cast<double>(r.pillars));
    ys.push_back(r.rgu_cycles);
    out.mean_hash_ratio += r.hash_ratio();
    out.mean_sort_ratio += r.sort_ratio();
  }
  if (!out.rows.empty()) {
    out.mean_hash_ratio /= static_cast<double>(out.rows.size());
    out.mean_sort_ratio /= static_cast<double>(out.rows.size());
  }
  out.rgu_r2 = xs.size() >= 2 ? LinearFitR2(xs, ys) : 1.0;
  return out;
}

ordered_json RulegenComparisonToJson(const RulegenComparison& c) {
  ordered_json j;
  j["density"] = c.density;
  ordered_json rows = ordered_json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"pillars", r.pillars},
                    {"rgu_cycles", r.rgu_cycles},
                    {"hash_cycles", r.hash_cycles},
                    {"sort_cycles", r.sort_cycles},
                    {"hash_ratio", r.hash_ratio()},
                    {"sort_ratio", r.sort_ratio()}});
  }
  j["rows"] = std::move(rows);
  j["rgu_linear_r2"] = c.rgu_r2;
  j["mean_hash_ratio"] = c.mean_hash_ratio;
  j["mean_sort_ratio"] = c.mean_sort_ratio;
  return j;
}

std::string RulegenComparisonToCsv(const RulegenComparison& c) {
  std::ostringstream out;
  out << "pillars,rgu_cycles,hash_cycles,sort_cycles,hash_ratio,sort_ratio\n";
  out << std::setprecision(10);
  for (const auto& r : c.rows) {
    out << r.pillars << ',' << r.rgu_cycles << ',' << r.hash_cycles << ','
        << r.sort_cycles << ',' << r.hash_ratio() << ',' << r.sort_ratio()
        << '\n';
  }
  return out.str();
}

ValidationReport RunValidation(int32_t trials, uint64_t seed) {
  PF_CHECK(trials >= 1, ErrorCode::kInvalidArgument, "trials must be >= 1");
  ValidationReport rep;
  std::mt19937_64 rng(seed);
  auto fail = [&](int32_t trial, const std::string& what) {
    rep.failures.push_back("trial " + std::to_string(trial) + ": " + what);
  };
  for (int32_t trial = 0; trial < trials; ++trial) {
    const ConvVariant::Kind kind = kAllVariantKinds[rng() % 5];
    const GridDims dims{static_cast<int32_t>(4 + rng() % 45),
                        static_cast<int32_t>(4 + rng() % 45)};
    const double density = 0.01 + 0.29 * std::uniform_real_distribution<>(0, 1)(rng);
    const int32_t channels = static_cast<int32_t>(1 + rng() % 16);
    const int32_t out_channels = static_cast<int32_t>(1 + rng() % 16);
    const CprTensor input = GenSyntheticPillars(
        dims, channels, density, static_cast<int32_t>(1 + rng() % 4), 3.0, rng());
    ConvVariant v = ConvVariant::SpConv();
    switch (kind) {
      case ConvVariant::Kind::kSpConv: break;
      case ConvVariant::Kind::kSpConvS: v = ConvVariant::SpConvS(); break;
      case ConvVariant::Kind::kSpConvP:
        v = ConvVariant::SpConvP(static_cast<double>(rng() % 4000));
        break;
      case ConvVariant::Kind::kSpStConv: v = ConvVariant::SpStConv(); break;
      case ConvVariant::Kind::kSpDeconv: v = ConvVariant::SpDeconv(); break;
    }

    const RuleSet streamed = GenerateRules(input.coords(), v);
    const RuleSet brute = BruteForceRules(input.coords(), v);
    ++rep.checks;
    if (!EquivalentRuleSets(streamed, brute))
      fail(trial, std::string(v.name()) + " rules differ from brute force");
    ++rep.checks;
    if (!streamed.IsMonotone())
      fail(trial, std::string(v.name()) + " rule stream not monotone");

    LayerSpec layer;
    layer.name = "validate";
    layer.variant = v;
    layer.in_channels = channels;
    layer.out_channels = out_channels;
    layer.weights = WeightKernel(v.kernel_positions(), channels, out_channels);
    std::uniform_int_distribution<int> w(-128, 127);
    for (auto& x : layer.weights.values) x = static_cast<int8_t>(w(rng));
    layer.requant.shift = static_cast<int32_t>(rng() % 12);
    ReferenceOptions ropts;
    ropts.requant = layer.requant;
    const CprTensor ref = ReferenceLayer(input, layer.weights, v, ropts);

    const TileCapacity minimal = MinimalCapacities(streamed);
    const TileCapacity random{
        minimal.cap_in + static_cast<int32_t>(rng() % 32),
        minimal.cap_out + static_cast<int32_t>(rng() % 64)};
    for (const TileCapacity& caps : {minimal, random, TileCapacity{}}) {
      ++rep.checks;
      const LayerResult lr = RunLayer(input, layer, caps);
      if (!(lr.output == ref))
        fail(trial, std::string(v.name()) + " tiled output differs from oracle (cap_in " +
                        std::to_string(caps.cap_in) + ")");
      ++rep.checks;
      if (lr.stats.max_gathers_per_input > 1)
        fail(trial, std::string(v.name()) + " input gathered more than once");
    }
  }
  return rep;
}

ordered_json ValidationToJson(const ValidationReport& r) {
  ordered_json j;
  j["checks"] = r.checks;
  j["failures"] = r.failures;
  j["ok"] = r.ok();
  return j;
}

}  // namespace pillarflow
