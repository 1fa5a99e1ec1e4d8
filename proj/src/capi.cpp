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

#include "pillarflow/pillarflow.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"
#include "pillarflow/network.hpp"
#include "pillarflow/scenario.hpp"
#include "pillarflow/serialize.hpp"

struct pf_tensor {
  pillarflow::CprTensor t;
};
struct pf_ruleset {
  pillarflow::RuleSet r;
};
struct pf_network {
  pillarflow::NetworkSpec spec;
};

namespace {

using nlohmann::json;
using pillarflow::Error;
using pillarflow::ErrorCode;

thread_local std::string g_last_error;

pf_status Fail(pf_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

template <typename F>
pf_status Guard(F&& f) {
  try {
    f();
    return PF_OK;
  } catch (const Error& e) {
    return Fail(static_cast<pf_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return Fail(PF_ERR_CONFIG_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PF_ERR_INTERNAL, e.what());
  }
}

#define PF_REQUIRE_ARG(p)                                              \
  do {                                                                 \
    if ((p) == nullptr)                                                \
      throw Error(ErrorCode::kInvalidArgument, #p " must not be NULL"); \
  } while (0)

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseConfig(const char* text) {
  try {
    json j = json::parse(text);
    PF_CHECK(j.is_object(), ErrorCode::kConfigParseError,
             "configuration must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  }
}

pillarflow::ScenarioConfig ScenarioFromJson(const json& j) {
  pillarflow::ScenarioConfig cfg;
  if (j.contains("network_spec")) {
    cfg.network = pillarflow::ParseNetworkSpec(j.at("network_spec").dump());
    cfg.network_label = j.value("network_label", std::string("inline"));
  } else {
    PF_CHECK(j.contains("network"), ErrorCode::kConfigParseError,
             "configuration needs \"network\"");
    const std::string path = j.at("network").get<std::string>();
    cfg.network = pillarflow::LoadNetworkSpec(path);
    cfg.network_label = path;
  }
  if (j.contains("hw")) {
    const json& hw = j.at("hw");
    cfg.hw = hw.is_object() ? pillarflow::ParseHwConfig(hw.dump())
                            : pillarflow::LoadHwConfig(hw.get<std::string>());
  }
  const std::string input = j.value("input", std::string("synthetic"));
  if (input != "synthetic") cfg.input_path = input;
  cfg.synthetic.seed = j.value("seed", cfg.synthetic.seed);
  cfg.synthetic.density = j.value("density", cfg.synthetic.density);
  cfg.synthetic.cluster_count = j.value("cluster_count", cfg.synthetic.cluster_count);
  cfg.synthetic.cluster_radius =
      j.value("cluster_radius", cfg.synthetic.cluster_radius);
  if (j.contains("opt")) {
    for (const auto& o : j.at("opt")) {
      const std::string name = o.get<std::string>();
      if (name == "weight-grouping") {
        cfg.weight_grouping = true;
      } else if (name == "ganged-scatter") {
        cfg.ganged_scatter = true;
      } else {
        throw Error(ErrorCode::kConfigParseError,
                    "unknown optimization '" + name + "'");
      }
    }
  }
  cfg.simulate = j.value("simulate", true);
  cfg.dense_compare = j.value("dense_compare", true);
  cfg.threshold_override = j.value("threshold", -1.0);
  return cfg;
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "1.0.0"; }

const char* pf_last_error(void) { return g_last_error.c_str(); }

const char* pf_status_name(pf_status status) {
  if (status == PF_ERR_INTERNAL) return "Internal";
  return pillarflow::ErrorCodeName(static_cast<ErrorCode>(status));
}

void pf_string_free(char* s) { std::free(s); }

pf_status pf_tensor_create(int32_t height, int32_t width, int32_t channels,
                           const int32_t* coords, const int32_t* features,
                           int64_t pillars, pf_tensor** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(out);
    PF_CHECK(pillars >= 0, ErrorCode::kInvalidArgument, "pillars must be >= 0");
    PF_CHECK(channels >= 0, ErrorCode::kInvalidArgument, "channels must be >= 0");
    if (pillars > 0) {
      PF_REQUIRE_ARG(coords);
      if (channels > 0) PF_REQUIRE_ARG(features);
    }
    std::vector<pillarflow::Coord> list(static_cast<size_t>(pillars));
    for (int64_t i = 0; i < pillars; ++i)
      list[i] = {coords[2 * i], coords[2 * i + 1]};
    std::vector<int32_t> feats(
        features, features + (pillars > 0 ? pillars * channels : 0));
    auto t = std::make_unique<pf_tensor>();
    t->t = pillarflow::BuildCpr(list, feats, {height, width}, channels);
    *out = t.release();
  });
}

pf_status pf_tensor_synthetic(int32_t height, int32_t width, int32_t channels,
                              double density, int32_t cluster_count,
                              double cluster_radius, uint64_t seed,
                              pf_tensor** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(out);
    auto t = std::make_unique<pf_tensor>();
    t->t = pillarflow::GenSyntheticPillars({height, width}, channels, density,
                                           cluster_count, cluster_radius, seed);
    *out = t.release();
  });
}

pf_status pf_tensor_load(const char* path, pf_tensor** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(path);
    PF_REQUIRE_ARG(out);
    auto t = std::make_unique<pf_tensor>();
    t->t = pillarflow::LoadCpr(path);
    *out = t.release();
  });
}

pf_status pf_tensor_save(const pf_tensor* t, const char* path) {
  return Guard([&] {
    PF_REQUIRE_ARG(t);
    PF_REQUIRE_ARG(path);
    pillarflow::SaveCpr(path, t->t);
  });
}

pf_status pf_tensor_info(const pf_tensor* t, int32_t* height, int32_t* width,
                         int32_t* channels, int64_t* pillars) {
  return Guard([&] {
    PF_REQUIRE_ARG(t);
    if (height) *height = t->t.dims().height;
    if (width) *width = t->t.dims().width;
    if (channels) *channels = t->t.channels();
    if (pillars) *pillars = t->t.pillar_count();
  });
}

pf_status pf_tensor_to_json(const pf_tensor* t, char** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(t);
    PF_REQUIRE_ARG(out);
    *out = Dup(pillarflow::TensorToJson(t->t).dump());
  });
}

void pf_tensor_destroy(pf_tensor* t) { delete t; }

pf_status pf_rules_generate(const pf_tensor* input, const char* variant,
                            pf_ruleset** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(input);
    PF_REQUIRE_ARG(variant);
    PF_REQUIRE_ARG(out);
    auto r = std::make_unique<pf_ruleset>();
    r->r = pillarflow::GenerateRules(input->t.coords(),
                                     pillarflow::ConvVariant::Parse(variant));
    *out = r.release();
  });
}

pf_status pf_rules_counts(const pf_ruleset* rules, int64_t* total_rules,
                          int32_t* outputs) {
  return Guard([&] {
    PF_REQUIRE_ARG(rules);
    if (total_rules) *total_rules = rules->r.total_rules();
    if (outputs) *outputs = rules->r.num_outputs();
  });
}

pf_status pf_rules_to_json(const pf_ruleset* rules, char** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(rules);
    PF_REQUIRE_ARG(out);
    *out = Dup(pillarflow::RuleSetToJson(rules->r).dump());
  });
}

void pf_rules_destroy(pf_ruleset* rules) { delete rules; }

pf_status pf_network_load(const char* path, pf_network** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(path);
    PF_REQUIRE_ARG(out);
    auto n = std::make_unique<pf_network>();
    n->spec = pillarflow::LoadNetworkSpec(path);
    *out = n.release();
  });
}

pf_status pf_network_parse(const char* text, pf_network** out) {
  return Guard([&] {
    PF_REQUIRE_ARG(text);
    PF_REQUIRE_ARG(out);
    auto n = std::make_unique<pf_network>();
    n->spec = pillarflow::ParseNetworkSpec(text);
    *out = n.release();
  });
}

pf_status pf_network_run(const pf_network* net, const pf_tensor* input,
                         pf_tensor** first_head) {
  return Guard([&] {
    PF_REQUIRE_ARG(net);
    PF_REQUIRE_ARG(input);
    PF_REQUIRE_ARG(first_head);
    pillarflow::NetworkResult res = pillarflow::RunNetwork(net->spec, input->t);
    auto t = std::make_unique<pf_tensor>();
    t->t = std::move(res.heads.front());
    *first_head = t.release();
  });
}

void pf_network_destroy(pf_network* net) { delete net; }

pf_status pf_run_scenario(const char* config_json, char** report) {
  return Guard([&] {
    PF_REQUIRE_ARG(config_json);
    PF_REQUIRE_ARG(report);
    const json j = ParseConfig(config_json);
    *report = Dup(pillarflow::RunScenario(ScenarioFromJson(j)).dump(2));
  });
}

pf_status pf_run_sweep(const char* config_json, char** report) {
  return Guard([&] {
    PF_REQUIRE_ARG(config_json);
    PF_REQUIRE_ARG(report);
    const json j = ParseConfig(config_json);
    pillarflow::SweepConfig sweep;
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      sweep.densities = s.value("densities", std::vector<double>{});
      sweep.thresholds = s.value("thresholds", std::vector<double>{});
      sweep.seeds = s.value("seeds", std::vector<uint64_t>{});
      sweep.threads = s.value("threads", 0);
    }
    const auto result = pillarflow::RunSweep(ScenarioFromJson(j), sweep);
    *report = Dup(j.value("format", std::string("json")) == "csv"
                      ? pillarflow::SweepToCsv(result)
                      : result.dump(2));
  });
}

pf_status pf_compare_rulegen(const char* config_json, char** report) {
  return Guard([&] {
    PF_REQUIRE_ARG(config_json);
    PF_REQUIRE_ARG(report);
    const json j = ParseConfig(config_json);
    std::vector<int64_t> pillars = j.value("pillars", std::vector<int64_t>{});
    if (pillars.empty()) {
      for (int64_t p = 1000; p <= 100000; p += 1000) pillars.push_back(p);
    }
    const auto seeds = j.value("seeds", std::vector<uint64_t>{1});
    const auto cmp =
        pillarflow::CompareRulegen(pillars, j.value("density", 0.1), seeds);
    *report = Dup(j.value("format", std::string("json")) == "csv"
                      ? pillarflow::RulegenComparisonToCsv(cmp)
                      : pillarflow::RulegenComparisonToJson(cmp).dump(2));
  });
}

pf_status pf_validate(int32_t trials, uint64_t seed, char** report,
                      int64_t* violations) {
  return Guard([&] {
    PF_REQUIRE_ARG(report);
    const auto rep = pillarflow::RunValidation(trials, seed);
    if (violations) *violations = static_cast<int64_t>(rep.failures.size());
    *report = Dup(pillarflow::ValidationToJson(rep).dump(2));
  });
}

}  // extern "C"
