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

#include "pillarflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace pillarflow {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kDuplicateCoordinate: return "DuplicateCoordinate";
    case ErrorCode::kCoordinateOutOfBounds: return "CoordinateOutOfBounds";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCapacityTooSmall: return "CapacityTooSmall";
    case ErrorCode::kInvalidTileConfig: return "InvalidTileConfig";
    case ErrorCode::kInvalidDensity: return "InvalidDensity";
    case ErrorCode::kConfigParseError: return "ConfigParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

CprCoords::CprCoords(GridDims d)
    : dims(d), row_starts(static_cast<size_t>(std::max(d.height, 0)) + 1, 0) {}

Coord CprCoords::at(int32_t index) const {
  // Row lookup by binary search over the prefix offsets.
  auto it = std::upper_bound(row_starts.begin(), row_starts.end(), index);
  const auto row = static_cast<int32_t>(it - row_starts.begin()) - 1;
  return {row, col_indices[index]};
}

std::vector<Coord> CprCoords::ToList() const {
  std::vector<Coord> out;
  out.reserve(col_indices.size());
  for (int32_t r = 0; r < dims.height; ++r) {
    for (int32_t i = row_starts[r]; i < row_starts[r + 1]; ++i) {
      out.push_back({r, col_indices[i]});
    }
  }
  return out;
}

int32_t CprCoords::Find(int32_t row, int32_t col) const {
  if (!dims.Contains(row, col)) return -1;
  auto first = col_indices.begin() + row_starts[row];
  auto last = col_indices.begin() + row_starts[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return -1;
  return static_cast<int32_t>(it - col_indices.begin());
}

void CprCoords::Validate() const {
  PF_CHECK(dims.height >= 1 && dims.width >= 1,
           ErrorCode::kInvariantViolation, "grid dims must be positive");
  PF_CHECK(row_starts.size() == static_cast<size_t>(dims.height) + 1,
           ErrorCode::kInvariantViolation, "row_starts must have height+1 entries");
  PF_CHECK(row_starts.front() == 0, ErrorCode::kInvariantViolation,
           "row_starts[0] must be 0");
  PF_CHECK(row_starts.back() == size(), ErrorCode::kInvariantViolation,
           "row_starts[height] must equal pillar count");
  for (int32_t r = 0; r < dims.height; ++r) {
    PF_CHECK(row_starts[r] <= row_starts[r + 1],
             ErrorCode::kInvariantViolation, "row_starts must be non-decreasing");
    for (int32_t i = row_starts[r]; i < row_starts[r + 1]; ++i) {
      const int32_t c = col_indices[i];
      PF_CHECK(c >= 0 && c < dims.width, ErrorCode::kInvariantViolation,
               "column index out of grid");
      PF_CHECK(i == row_starts[r] || col_indices[i - 1] < c,
               ErrorCode::kInvariantViolation,
               "column indices must strictly increase within a row");
    }
  }
}

CprCoords CprCoords::FromSorted(GridDims dims, std::span<const Coord> sorted) {
  CprCoords out(dims);
  out.col_indices.reserve(sorted.size());
  for (const Coord& c : sorted) {
    out.row_starts[c.row + 1]++;
    out.col_indices.push_back(c.col);
  }
  for (int32_t r = 0; r < dims.height; ++r) {
    out.row_starts[r + 1] += out.row_starts[r];
  }
  return out;
}

CprTensor::CprTensor(CprCoords coords, int32_t channels, Precision precision,
                     std::vector<int32_t> features)
    : coords_(std::move(coords)),
      channels_(channels),
      precision_(precision),
      features_(std::move(features)) {}

void CprTensor::Validate() const {
  coords_.Validate();
  PF_CHECK(channels_ >= 1, ErrorCode::kInvariantViolation,
           "channel count must be positive");
  PF_CHECK(features_.size() == static_cast<size_t>(pillar_count()) * channels_,
           ErrorCode::kInvariantViolation, "features length must be P x C");
  if (precision_ == Precision::kInt8) {
    for (int32_t v : features_) {
      PF_CHECK(v >= -128 && v <= 127, ErrorCode::kInvariantViolation,
               "int8 feature out of range");
    }
  }
}

CprCoords BuildCprCoords(std::span<const Coord> coords, GridDims dims) {
  PF_CHECK(dims.height >= 1 && dims.width >= 1, ErrorCode::kInvalidArgument,
           "grid dims must be positive");
  std::vector<Coord> sorted(coords.begin(), coords.end());
  for (const Coord& c : sorted) {
    PF_CHECK(dims.Contains(c.row, c.col), ErrorCode::kCoordinateOutOfBounds,
             "coordinate (" + std::to_string(c.row) + "," +
                 std::to_string(c.col) + ") outside grid");
  }
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  PF_CHECK(dup == sorted.end(), ErrorCode::kDuplicateCoordinate,
           "duplicate coordinate (" +
               (dup == sorted.end() ? std::string()
                                    : std::to_string(dup->row) + "," +
                                          std::to_string(dup->col)) +
               ")");
  return CprCoords::FromSorted(dims, sorted);
}

CprTensor BuildCpr(std::span<const Coord> coords,
                   std::span<const int32_t> features, GridDims dims,
                   int32_t channels, Precision precision) {
  PF_CHECK(channels >= 1, ErrorCode::kInvalidArgument,
           "channel count must be positive");
  PF_CHECK(features.size() == coords.size() * static_cast<size_t>(channels),
           ErrorCode::kShapeMismatch, "features length must be P x C");
  CprCoords cpr = BuildCprCoords(coords, dims);

  std::vector<size_t> order(coords.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return coords[a] < coords[b]; });

  std::vector<int32_t> feats;
  feats.reserve(features.size());
  for (size_t src : order) {
    auto f = features.subspan(src * channels, channels);
    feats.insert(feats.end(), f.begin(), f.end());
  }
  CprTensor t(std::move(cpr), channels, precision, std::move(feats));
  if (precision == Precision::kInt8) {
    for (int32_t v : t.features()) {
      PF_CHECK(v >= -128 && v <= 127, ErrorCode::kInvalidArgument,
               "int8 feature out of range");
    }
  }
  return t;
}

DenseTensor CprToDense(const CprTensor& t) {
  DenseTensor dense(t.channels(), t.dims());
  const CprCoords& cc = t.coords();
  for (int32_t r = 0; r < cc.dims.height; ++r) {
    for (int32_t i = cc.row_begin(r); i < cc.row_end(r); ++i) {
      auto f = t.feature(i);
      for (int32_t c = 0; c < t.channels(); ++c) {
        dense.at(c, r, cc.col_indices[i]) = f[c];
      }
    }
  }
  return dense;
}

CprTensor DenseToCpr(const DenseTensor& dense, Precision precision) {
  std::vector<Coord> coords;
  std::vector<int32_t> feats;
  for (int32_t r = 0; r < dense.dims.height; ++r) {
    for (int32_t col = 0; col < dense.dims.width; ++col) {
      bool active = false;
      for (int32_t c = 0; c < dense.channels && !active; ++c) {
        active = dense.at(c, r, col) != 0;
      }
      if (!active) continue;
      coords.push_back({r, col});
      for (int32_t c = 0; c < dense.channels; ++c) {
        feats.push_back(dense.at(c, r, col));
      }
    }
  }
  return CprTensor(CprCoords::FromSorted(dense.dims, coords), dense.channels,
                   precision, std::move(feats));
}

CprTensor Restrict(const CprTensor& t, const CprCoords& coords) {
  PF_CHECK(t.dims() == coords.dims, ErrorCode::kShapeMismatch,
           "restrict: grid dims differ");
  std::vector<int32_t> feats(static_cast<size_t>(coords.size()) * t.channels(),
                             0);
  const CprCoords& src = t.coords();
  for (int32_t r = 0; r < coords.dims.height; ++r) {
    // Both rows are sorted; walk them together.
    int32_t j = src.row_begin(r);
    for (int32_t i = coords.row_begin(r); i < coords.row_end(r); ++i) {
      while (j < src.row_end(r) && src.col_indices[j] < coords.col_indices[i]) {
        ++j;
      }
      if (j < src.row_end(r) && src.col_indices[j] == coords.col_indices[i]) {
        auto f = t.feature(j);
        std::copy(f.begin(), f.end(),
                  feats.begin() + static_cast<int64_t>(i) * t.channels());
      }
    }
  }
  return CprTensor(coords, t.channels(), t.precision(), std::move(feats));
}

ConvVariant ConvVariant::SpConvP(double threshold) {
  PF_CHECK(threshold >= 0.0 && std::isfinite(threshold),
           ErrorCode::kInvalidArgument,
           "pruning threshold must be a non-negative number");
  return ConvVariant(Kind::kSpConvP, threshold);
}

ConvVariant ConvVariant::Parse(std::string_view name, double threshold) {
  if (name == "SpConv") return SpConv();
  if (name == "SpConvS" || name == "SpConv-S") return SpConvS();
  if (name == "SpConvP" || name == "SpConv-P") return SpConvP(threshold);
  if (name == "SpStConv") return SpStConv();
  if (name == "SpDeconv") return SpDeconv();
  throw Error(ErrorCode::kConfigParseError,
              "unknown convolution variant '" + std::string(name) + "'");
}

int ConvVariant::stride() const {
  return (kind_ == Kind::kSpStConv || kind_ == Kind::kSpDeconv) ? 2 : 1;
}

std::string_view ConvVariant::name() const {
  switch (kind_) {
    case Kind::kSpConv: return "SpConv";
    case Kind::kSpConvS: return "SpConvS";
    case Kind::kSpConvP: return "SpConvP";
    case Kind::kSpStConv: return "SpStConv";
    case Kind::kSpDeconv: return "SpDeconv";
  }
  return "?";
}

GridDims OutputDims(const ConvVariant& variant, GridDims in) {
  switch (variant.kind()) {
    case ConvVariant::Kind::kSpStConv:
      return {(in.height + 1) / 2, (in.width + 1) / 2};
    case ConvVariant::Kind::kSpDeconv:
      return {in.height * 2, in.width * 2};
    default:
      return in;
  }
}

KernelPos KernelPosition(const ConvVariant& variant, int k) {
  if (variant.is_deconv()) return {k / 2, k % 2};
  return {k / 3 - 1, k % 3 - 1};
}

int KernelIndex(int dr, int dc) { return (dr + 1) * 3 + (dc + 1); }

double RepresentativeValue(std::span<const int32_t> pillar,
                           RepresentativeKind kind) {
  switch (kind) {
    case RepresentativeKind::kL2: {
      // Squares of int32 fit in 62 bits; the sum is exact in 128 bits and is
      // rounded once before the square root.
      __int128 sum = 0;
      for (int32_t v : pillar) sum += static_cast<__int128>(int64_t{v} * v);
      return std::sqrt(static_cast<long double>(sum));
    }
    case RepresentativeKind::kMaxAbs: {
      int64_t m = 0;
      for (int32_t v : pillar) m = std::max<int64_t>(m, std::llabs(int64_t{v}));
      return static_cast<double>(m);
    }
    case RepresentativeKind::kL1: {
      int64_t s = 0;
      for (int32_t v : pillar) s += std::llabs(int64_t{v});
      return static_cast<double>(s);
    }
  }
  return 0.0;
}

int8_t RequantizeValue(int32_t acc, const RequantSpec& spec) {
  const int32_t shifted = spec.shift >= 31 ? (acc < 0 ? -1 : 0) : acc >> spec.shift;
  return static_cast<int8_t>(
      std::clamp(shifted, RequantSpec::kMin, RequantSpec::kMax));
}

std::vector<int8_t> Requantize(std::span<const int32_t> acc,
                               const RequantSpec& spec) {
  PF_CHECK(spec.shift >= 0, ErrorCode::kInvalidArgument,
           "requantization shift must be non-negative");
  std::vector<int8_t> out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(),
                 [&](int32_t v) { return RequantizeValue(v, spec); });
  return out;
}

CprTensor RequantizeTensor(const CprTensor& acc, const RequantSpec& spec) {
  PF_CHECK(spec.shift >= 0, ErrorCode::kInvalidArgument,
           "requantization shift must be non-negative");
  std::vector<int32_t> feats(acc.features().size());
  std::transform(acc.features().begin(), acc.features().end(), feats.begin(),
                 [&](int32_t v) { return RequantizeValue(v, spec); });
  return CprTensor(acc.coords(), acc.channels(), Precision::kInt8,
                   std::move(feats));
}

}  // namespace pillarflow
