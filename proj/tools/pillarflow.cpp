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

// pillarflow command-line tool. All engine work goes through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pillarflow/pillarflow.h"

namespace {

using nlohmann::ordered_json;

struct Common {
  std::string network;
  std::string hw = "HE";
  std::string input = "synthetic";
  uint64_t seed = 1;
  double density = 0.05;
  int32_t clusters = 64;
  double radius = 6.0;
  std::vector<std::string> opt;
  double threshold = -1.0;
  bool no_sim = false;
  bool no_dense = false;
  std::string out = "json";
  std::string output;
};

// Owns a string returned by the C API.
class ApiString {
 public:
  ApiString() = default;
  ~ApiString() { pf_string_free(s_); }
  ApiString(const ApiString&) = delete;
  ApiString& operator=(const ApiString&) = delete;
  char** out() { return &s_; }
  std::string str() const { return s_ ? s_ : ""; }

 private:
  char* s_ = nullptr;
};

int Report(pf_status status) {
  std::cerr << "error: " << pf_status_name(status) << ": " << pf_last_error()
            << "\n";
  return 2;
}

int Emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return 0;
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  f << text;
  return 0;
}

void AddCommon(CLI::App* cmd, Common& c, bool need_network) {
  auto* net = cmd->add_option("--network", c.network, "network JSON file");
  if (need_network) net->required();
  cmd->add_option("--hw", c.hw, "HE, LE or a hardware JSON file");
  cmd->add_option("--input", c.input, "'synthetic' or a CPR binary file");
  cmd->add_option("--seed", c.seed, "synthetic input seed");
  cmd->add_option("--density", c.density, "synthetic input density in (0, 1]");
  cmd->add_option("--clusters", c.clusters, "synthetic cluster count");
  cmd->add_option("--radius", c.radius, "synthetic cluster radius (cells)");
  cmd->add_option("--opt", c.opt, "weight-grouping,ganged-scatter")
      ->delimiter(',')
      ->check(CLI::IsMember({"weight-grouping", "ganged-scatter"}));
  cmd->add_option("--threshold", c.threshold,
                  "override every SpConv-P threshold (>= 0)");
  cmd->add_flag("--no-sim", c.no_sim, "skip the cycle simulation");
  cmd->add_flag("--no-dense", c.no_dense, "skip the dense-equivalent run");
  cmd->add_option("--out", c.out, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("-o,--output", c.output, "write to a file instead of stdout");
}

ordered_json ScenarioJson(const Common& c) {
  ordered_json j;
  j["network"] = c.network;
  j["hw"] = c.hw;
  j["input"] = c.input;
  j["seed"] = c.seed;
  j["density"] = c.density;
  j["cluster_count"] = c.clusters;
  j["cluster_radius"] = c.radius;
  j["opt"] = c.opt;
  j["threshold"] = c.threshold;
  j["simulate"] = !c.no_sim;
  j["dense_compare"] = !c.no_dense;
  j["format"] = c.out;
  return j;
}

std::string LayersCsv(const std::string& report) {
  const auto r = nlohmann::json::parse(report);
  std::ostringstream out;
  out << "layer,variant,active_in,active_out,density_in,density_out,"
         "out_in_ratio,macs_performed,ops_savings,cycles,utilization\n";
  for (const auto& l : r.at("layers")) {
    out << l.at("name").get<std::string>() << ','
        << l.at("variant").get<std::string>() << ',' << l.at("active_in") << ','
        << l.at("active_out") << ',' << l.at("density_in") << ','
        << l.at("density_out") << ',' << l.at("out_in_ratio") << ',';
    if (l.contains("ops")) {
      out << l.at("ops").at("macs_performed") << ','
          << l.at("ops").at("ops_savings");
    } else {
      out << ',';
    }
    out << ',';
    if (l.contains("sim")) {
      const auto& st = l.at("sim").at("stats");
      out << st.at("total_cycles") << ',' << st.at("utilization");
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse pillar convolution engine and dataflow simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pf_version()));

  Common run_opts;
  auto* run = app.add_subcommand("run", "run a network and report per layer");
  AddCommon(run, run_opts, true);

  Common sweep_opts;
  std::vector<double> densities, thresholds;
  std::vector<uint64_t> seeds;
  int threads = 0;
  auto* sweep = app.add_subcommand("sweep", "run a grid of scenario points");
  AddCommon(sweep, sweep_opts, true);
  sweep->add_option("--densities", densities, "input densities")->delimiter(',');
  sweep->add_option("--thresholds", thresholds, "SpConv-P thresholds")
      ->delimiter(',');
  sweep->add_option("--seeds", seeds, "input seeds")->delimiter(',');
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  std::vector<int64_t> pillars;
  int64_t p_min = 1000, p_max = 100000, p_step = 1000;
  double cmp_density = 0.1;
  std::vector<uint64_t> cmp_seeds = {1};
  std::string cmp_out = "json", cmp_output;
  auto* cmp = app.add_subcommand("compare-rulegen",
                                 "mapping cycles of RGU vs hash vs merge sort");
  cmp->add_option("--pillars", pillars, "explicit pillar counts")->delimiter(',');
  cmp->add_option("--p-min", p_min, "smallest pillar count");
  cmp->add_option("--p-max", p_max, "largest pillar count");
  cmp->add_option("--p-step", p_step, "pillar count step")
      ->check(CLI::PositiveNumber);
  cmp->add_option("--density", cmp_density, "input density in (0, 1]");
  cmp->add_option("--seeds", cmp_seeds, "seeds to average over")->delimiter(',');
  cmp->add_option("--out", cmp_out, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmp->add_option("-o,--output", cmp_output, "write to a file");

  int32_t trials = 200;
  uint64_t val_seed = 1;
  std::string val_output;
  auto* val = app.add_subcommand("validate", "randomized oracle-equivalence suite");
  val->add_option("--trials", trials, "random instances")->check(CLI::PositiveNumber);
  val->add_option("--seed", val_seed, "suite seed");
  val->add_option("-o,--output", val_output, "write the report to a file");

  int32_t gen_h = 496, gen_w = 432, gen_c = 64;
  double gen_density = 0.05, gen_radius = 6.0;
  int32_t gen_clusters = 64;
  uint64_t gen_seed = 1;
  std::string gen_path;
  auto* gen = app.add_subcommand("gen-input", "write a synthetic CPR tensor");
  gen->add_option("--height", gen_h, "grid height");
  gen->add_option("--width", gen_w, "grid width");
  gen->add_option("--channels", gen_c, "feature channels");
  gen->add_option("--density", gen_density, "density in (0, 1]");
  gen->add_option("--clusters", gen_clusters, "cluster count");
  gen->add_option("--radius", gen_radius, "cluster radius");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("-o,--output", gen_path, "CPR binary path")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    ApiString report;
    const std::string cfg = ScenarioJson(run_opts).dump();
    const pf_status s = pf_run_scenario(cfg.c_str(), report.out());
    if (s != PF_OK) return Report(s);
    return Emit(run_opts.out == "csv" ? LayersCsv(report.str()) : report.str(),
                run_opts.output);
  }
  if (*sweep) {
    ordered_json cfg = ScenarioJson(sweep_opts);
    cfg["sweep"] = {{"densities", densities},
                    {"thresholds", thresholds},
                    {"seeds", seeds},
                    {"threads", threads}};
    ApiString report;
    const pf_status s = pf_run_sweep(cfg.dump().c_str(), report.out());
    if (s != PF_OK) return Report(s);
    return Emit(report.str(), sweep_opts.output);
  }
  if (*cmp) {
    if (pillars.empty()) {
      for (int64_t p = p_min; p <= p_max; p += p_step) pillars.push_back(p);
    }
    ordered_json cfg = {{"pillars", pillars},
                        {"density", cmp_density},
                        {"seeds", cmp_seeds},
                        {"format", cmp_out}};
    ApiString report;
    const pf_status s = pf_compare_rulegen(cfg.dump().c_str(), report.out());
    if (s != PF_OK) return Report(s);
    return Emit(report.str(), cmp_output);
  }
  if (*val) {
    ApiString report;
    int64_t violations = 0;
    const pf_status s = pf_validate(trials, val_seed, report.out(), &violations);
    if (s != PF_OK) return Report(s);
    const int rc = Emit(report.str(), val_output);
    if (violations > 0) {
      std::cerr << "validate: " << violations << " violation(s)\n";
      return 1;
    }
    return rc;
  }
  if (*gen) {
    pf_tensor* t = nullptr;
    pf_status s = pf_tensor_synthetic(gen_h, gen_w, gen_c, gen_density,
                                      gen_clusters, gen_radius, gen_seed, &t);
    if (s != PF_OK) return Report(s);
    s = pf_tensor_save(t, gen_path.c_str());
    int64_t p = 0;
    pf_tensor_info(t, nullptr, nullptr, nullptr, &p);
    pf_tensor_destroy(t);
    if (s != PF_OK) return Report(s);
    std::cerr << "wrote " << p << " pillars to " << gen_path << "\n";
    return 0;
  }
  return 0;
}
