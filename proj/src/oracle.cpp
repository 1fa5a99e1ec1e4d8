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

#include "pillarflow/oracle.hpp"

#include <set>

namespace pillarflow {
namespace {

bool IsActive(const CprCoords& set, int32_t r, int32_t c) {
  return set.Find(r, c) >= 0;
}

}  // namespace

CprCoords ActiveSetOracle(const CprCoords& active_in,
                          const ConvVariant& variant) {
  const GridDims in = active_in.dims;
  const GridDims out = OutputDims(variant, in);
  std::set<Coord> result;
  using Kind = ConvVariant::Kind;
  for (const Coord& p : active_in.ToList()) {
    switch (variant.kind()) {
      case Kind::kSpConvS:
        result.insert(p);
        break;
      case Kind::kSpConv:
      case Kind::kSpConvP:
        for (int r = p.row - 1; r <= p.row + 1; ++r) {
          for (int c = p.col - 1; c <= p.col + 1; ++c) {
            if (out.Contains(r, c)) result.insert({r, c});
          }
        }
        break;
      case Kind::kSpStConv:
        for (int r = p.row - 1; r <= p.row + 1; ++r) {
          for (int c = p.col - 1; c <= p.col + 1; ++c) {
            if (in.Contains(r, c) && r % 2 == 0 && c % 2 == 0) {
              result.insert({r / 2, c / 2});
            }
          }
        }
        break;
      case Kind::kSpDeconv:
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            result.insert({2 * p.row + a, 2 * p.col + b});
          }
        }
        break;
    }
  }
  std::vector<Coord> sorted(result.begin(), result.end());
  return CprCoords::FromSorted(out, sorted);
}

DenseConvResult DenseConvOracle(const DenseTensor& input,
                                const WeightKernel& weights,
                                const ConvVariant& variant,
                                const CprCoords& active_in) {
  PF_CHECK(input.channels == weights.in_channels, ErrorCode::kShapeMismatch,
           "input channels do not match weight in_channels");
  PF_CHECK(weights.positions == variant.kernel_positions(),
           ErrorCode::kShapeMismatch, "kernel size does not match variant");
  PF_CHECK(input.dims == active_in.dims, ErrorCode::kShapeMismatch,
           "active set grid differs from input grid");
  const GridDims out_dims = OutputDims(variant, input.dims);
  const int32_t C = weights.in_channels;
  const int32_t M = weights.out_channels;
  DenseConvResult res{DenseTensor(M, out_dims), ActiveSetOracle(active_in, variant)};

  if (variant.is_deconv()) {
    // Transposed conv, stride 2, 2x2 kernel: each output cell has exactly one
    // source cell.
    for (int32_t r = 0; r < out_dims.height; ++r) {
      for (int32_t c = 0; c < out_dims.width; ++c) {
        const int k = (r % 2) * 2 + (c % 2);
        for (int32_t m = 0; m < M; ++m) {
          int32_t acc = 0;
          for (int32_t ch = 0; ch < C; ++ch) {
            acc += input.at(ch, r / 2, c / 2) * int32_t{weights.at(k, ch, m)};
          }
          res.acc.at(m, r, c) = acc;
        }
      }
    }
    return res;
  }

  const int stride = variant.stride();
  for (int32_t r = 0; r < out_dims.height; ++r) {
    for (int32_t c = 0; c < out_dims.width; ++c) {
      const int32_t cr = r * stride;
      const int32_t cc = c * stride;
      for (int32_t m = 0; m < M; ++m) {
        int32_t acc = 0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int32_t ir = cr + dr;
            const int32_t ic = cc - dc;
            if (!input.dims.Contains(ir, ic)) continue;  // zero padding
            const int k = KernelIndex(dr, dc);
            for (int32_t ch = 0; ch < C; ++ch) {
              acc += input.at(ch, ir, ic) * int32_t{weights.at(k, ch, m)};
            }
          }
        }
        res.acc.at(m, r, c) = acc;
      }
    }
  }
  return res;
}

CprTensor ReferenceLayer(const CprTensor& input, const WeightKernel& weights,
                         const ConvVariant& variant,
                         const ReferenceOptions& opts) {
  const DenseConvResult conv =
      DenseConvOracle(CprToDense(input), weights, variant, input.coords());
  const int32_t M = weights.out_channels;
  const bool prune = variant.kind() == ConvVariant::Kind::kSpConvP;

  std::vector<Coord> kept;
  std::vector<int32_t> feats;
  std::vector<int32_t> acc(M);
  std::vector<int32_t> q(M);
  for (const Coord& o : conv.active_out.ToList()) {
    for (int32_t m = 0; m < M; ++m) acc[m] = conv.acc.at(m, o.row, o.col);
    for (int32_t m = 0; m < M; ++m) q[m] = RequantizeValue(acc[m], opts.requant);
    if (prune) {
      const auto& basis = opts.prune_after_requant ? q : acc;
      if (RepresentativeValue(basis, opts.representative) < variant.threshold()) {
        continue;
      }
    }
    kept.push_back(o);
    feats.insert(feats.end(), q.begin(), q.end());
  }
  return CprTensor(CprCoords::FromSorted(conv.active_out.dims, kept), M,
                   Precision::kInt8, std::move(feats));
}

int64_t CountContributingPairs(const CprCoords& active_in,
                               const ConvVariant& variant) {
  const GridDims in = active_in.dims;
  const GridDims out = OutputDims(variant, in);
  int64_t count = 0;
  for (const Coord& p : active_in.ToList()) {
    for (int k = 0; k < variant.kernel_positions(); ++k) {
      const KernelPos kp = KernelPosition(variant, k);
      switch (variant.kind()) {
        case ConvVariant::Kind::kSpDeconv:
          ++count;
          break;
        case ConvVariant::Kind::kSpStConv: {
          const int32_t r = p.row - kp.dr;
          const int32_t c = p.col + kp.dc;
          if (in.Contains(r, c) && r % 2 == 0 && c % 2 == 0) ++count;
          break;
        }
        case ConvVariant::Kind::kSpConvS: {
          const int32_t r = p.row - kp.dr;
          const int32_t c = p.col + kp.dc;
          if (IsActive(active_in, r, c)) ++count;
          break;
        }
        default:
          if (out.Contains(p.row - kp.dr, p.col + kp.dc)) ++count;
          break;
      }
    }
  }
  return count;
}

}  // namespace pillarflow
