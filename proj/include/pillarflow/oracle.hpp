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

// Brute-force dense references. Everything here works on full grids and is
// deliberately independent of the rule generator and the tiled executor.

#ifndef PILLARFLOW_ORACLE_HPP_
#define PILLARFLOW_ORACLE_HPP_

#include <vector>

#include "pillarflow/core.hpp"

namespace pillarflow {

// Output coordinate set of a sparse convolution, by geometric enumeration.
CprCoords ActiveSetOracle(const CprCoords& active_in, const ConvVariant& variant);

struct DenseConvResult {
  DenseTensor acc;       // M x H' x W', int32, no saturation
  CprCoords active_out;  // variant mask (before any pruning)
};

// Textbook integer convolution of the dense input over the whole output grid
// (3x3 zero padding, or 2x2 stride-2 transposed for deconvolution), followed
// by the variant's active-set mask. Cells of `input` outside `active_in` are
// expected to be zero.
DenseConvResult DenseConvOracle(const DenseTensor& input,
                                const WeightKernel& weights,
                                const ConvVariant& variant,
                                const CprCoords& active_in);

struct ReferenceOptions {
  RequantSpec requant;
  bool prune_after_requant = false;
  RepresentativeKind representative = RepresentativeKind::kL2;
};

// Dense path: conv -> mask -> prune (SpConvP) -> requantize, returned as CPR.
CprTensor ReferenceLayer(const CprTensor& input, const WeightKernel& weights,
                         const ConvVariant& variant,
                         const ReferenceOptions& opts);

// Number of (input pillar, kernel position) pairs that land on an output.
int64_t CountContributingPairs(const CprCoords& active_in,
                               const ConvVariant& variant);

}  // namespace pillarflow

#endif  // PILLARFLOW_ORACLE_HPP_
