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

/* C interface to the pillarflow engine.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_destroy function. Every fallible call returns a pf_status; on
 * failure pf_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread). Strings returned through char**
 * are heap-allocated and released with pf_string_free().
 */

#ifndef PILLARFLOW_PILLARFLOW_H_
#define PILLARFLOW_PILLARFLOW_H_

#include <stdint.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_DUPLICATE_COORDINATE = 1,
  PF_ERR_COORDINATE_OUT_OF_BOUNDS = 2,
  PF_ERR_SHAPE_MISMATCH = 3,
  PF_ERR_CAPACITY_TOO_SMALL = 4,
  PF_ERR_INVALID_TILE_CONFIG = 5,
  PF_ERR_INVALID_DENSITY = 6,
  PF_ERR_CONFIG_PARSE = 7,
  PF_ERR_INVALID_ARGUMENT = 8,
  PF_ERR_IO = 9,
  PF_ERR_INVARIANT_VIOLATION = 10,
  PF_ERR_INTERNAL = 99
} pf_status;

typedef struct pf_tensor pf_tensor;
typedef struct pf_ruleset pf_ruleset;
typedef struct pf_network pf_network;

PF_API const char* pf_version(void);
PF_API const char* pf_last_error(void);
PF_API const char* pf_status_name(pf_status status);
PF_API void pf_string_free(char* s);

/* Tensors. coords holds `pillars` (row, col) pairs in any order; features
 * holds pillars * channels int8-range values in the same order. */
PF_API pf_status pf_tensor_create(int32_t height, int32_t width,
                                  int32_t channels, const int32_t* coords,
                                  const int32_t* features, int64_t pillars,
                                  pf_tensor** out);
PF_API pf_status pf_tensor_synthetic(int32_t height, int32_t width,
                                     int32_t channels, double density,
                                     int32_t cluster_count,
                                     double cluster_radius, uint64_t seed,
                                     pf_tensor** out);
PF_API pf_status pf_tensor_load(const char* path, pf_tensor** out);
PF_API pf_status pf_tensor_save(const pf_tensor* t, const char* path);
PF_API pf_status pf_tensor_info(const pf_tensor* t, int32_t* height,
                                int32_t* width, int32_t* channels,
                                int64_t* pillars);
PF_API pf_status pf_tensor_to_json(const pf_tensor* t, char** json);
PF_API void pf_tensor_destroy(pf_tensor* t);

/* Rule generation. variant: SpConv, SpConvS, SpConvP, SpStConv, SpDeconv. */
PF_API pf_status pf_rules_generate(const pf_tensor* input, const char* variant,
                                   pf_ruleset** out);
PF_API pf_status pf_rules_counts(const pf_ruleset* rules, int64_t* total_rules,
                                 int32_t* outputs);
PF_API pf_status pf_rules_to_json(const pf_ruleset* rules, char** json);
PF_API void pf_rules_destroy(pf_ruleset* rules);

/* Networks (JSON layer graphs). */
PF_API pf_status pf_network_load(const char* path, pf_network** out);
PF_API pf_status pf_network_parse(const char* json, pf_network** out);
PF_API pf_status pf_network_run(const pf_network* net, const pf_tensor* input,
                                pf_tensor** first_head);
PF_API void pf_network_destroy(pf_network* net);

/* Experiments. config_json keys:
 *   network        path to a network JSON file (or "network_spec": {...})
 *   hw             "HE", "LE", a file path, or an inline object
 *   input          "synthetic" (default) or a CPR binary path
 *   seed, density, cluster_count, cluster_radius   synthetic input
 *   opt            ["weight-grouping", "ganged-scatter"]
 *   simulate, dense_compare   booleans (default true)
 *   threshold      overrides SpConv-P thresholds when >= 0
 *   sweep          {"densities": [], "thresholds": [], "seeds": [],
 *                   "threads": n}  (pf_run_sweep only)
 *   format         "json" (default) or "csv" (sweep)
 */
PF_API pf_status pf_run_scenario(const char* config_json, char** report);
PF_API pf_status pf_run_sweep(const char* config_json, char** report);

/* config_json: {"pillars": [...], "density": d, "seeds": [...],
 *               "format": "json" | "csv"} */
PF_API pf_status pf_compare_rulegen(const char* config_json, char** report);

/* Runs the randomized oracle suite; *violations receives the failure count. */
PF_API pf_status pf_validate(int32_t trials, uint64_t seed, char** report,
                             int64_t* violations);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* PILLARFLOW_PILLARFLOW_H_ */
