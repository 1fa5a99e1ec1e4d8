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

// Sparse pillar data model: compressed-pillar-row (CPR) tensors, convolution
// variants, int8 weights and requantization.
//
// Kernel position convention. A 3x3 kernel position is a pair (dr, dc) with
// dr, dc in {-1, 0, +1} and flat index k = (dr + 1) * 3 + (dc + 1):
//   dr = input row - output row   (top / center / bottom weight row)
//   dc = output col - input col   (horizontal dilation step of the input)
// so the output at (r, c) accumulates input(r + dr, c - dc) * W[k]. This is
// the labelling used by the streaming rule generator, where each input row is
// tied to a weight row and each merged column is dilated by -1/0/+1.
// Deconvolution uses a 2x2 kernel, k = a * 2 + b, mapping input (r, c) to
// output (2r + a, 2c + b).

#ifndef PILLARFLOW_CORE_HPP_
#define PILLARFLOW_CORE_HPP_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pillarflow/error.hpp"

namespace pillarflow {

struct GridDims {
  int32_t height = 0;
  int32_t width = 0;

  int64_t cells() const { return int64_t{height} * width; }
  bool Contains(int32_t row, int32_t col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct Coord {
  int32_t row = 0;
  int32_t col = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

enum class Precision : uint8_t { kInt8 = 0, kInt32 = 1 };

// Coordinates of active pillars, CSR-style. Pillar i (global index) is the
// i-th active cell in row-major order.
struct CprCoords {
  GridDims dims;
  std::vector<int32_t> row_starts;   // height + 1 prefix offsets
  std::vector<int32_t> col_indices;  // strictly increasing within a row

  CprCoords() = default;
  explicit CprCoords(GridDims d);

  int32_t size() const { return static_cast<int32_t>(col_indices.size()); }
  int32_t row_begin(int32_t row) const { return row_starts[row]; }
  int32_t row_end(int32_t row) const { return row_starts[row + 1]; }
  Coord at(int32_t index) const;
  std::vector<Coord> ToList() const;
  // Index of (row, col) or -1.
  int32_t Find(int32_t row, int32_t col) const;
  // Throws kInvariantViolation if the CPR invariants do not hold.
  void Validate() const;

  // Builds from coordinates already sorted row-major and unique.
  static CprCoords FromSorted(GridDims dims, std::span<const Coord> sorted);

  friend bool operator==(const CprCoords&, const CprCoords&) = default;
};

class CprTensor {
 public:
  CprTensor() = default;
  CprTensor(CprCoords coords, int32_t channels, Precision precision,
            std::vector<int32_t> features);

  const CprCoords& coords() const { return coords_; }
  const GridDims& dims() const { return coords_.dims; }
  int32_t channels() const { return channels_; }
  Precision precision() const { return precision_; }
  int32_t pillar_count() const { return coords_.size(); }

  std::span<const int32_t> feature(int32_t index) const {
    return {features_.data() + int64_t{index} * channels_,
            static_cast<size_t>(channels_)};
  }
  const std::vector<int32_t>& features() const { return features_; }

  void Validate() const;

  friend bool operator==(const CprTensor&, const CprTensor&) = default;

 private:
  CprCoords coords_;
  int32_t channels_ = 0;
  Precision precision_ = Precision::kInt8;
  std::vector<int32_t> features_;  // P x C, int8 range when kInt8
};

// Dense C x H x W array of 32-bit values.
struct DenseTensor {
  int32_t channels = 0;
  GridDims dims;
  std::vector<int32_t> data;

  DenseTensor() = default;
  DenseTensor(int32_t c, GridDims d)
      : channels(c), dims(d), data(static_cast<size_t>(c * d.cells()), 0) {}

  int32_t& at(int32_t c, int32_t r, int32_t col) {
    return data[(int64_t{c} * dims.height + r) * dims.width + col];
  }
  int32_t at(int32_t c, int32_t r, int32_t col) const {
    return data[(int64_t{c} * dims.height + r) * dims.width + col];
  }
};

// Builds a CPR tensor from an unordered coordinate list. features is laid out
// P x channels in the order of coords.
CprTensor BuildCpr(std::span<const Coord> coords,
                   std::span<const int32_t> features, GridDims dims,
                   int32_t channels, Precision precision = Precision::kInt8);

CprCoords BuildCprCoords(std::span<const Coord> coords, GridDims dims);

DenseTensor CprToDense(const CprTensor& t);

// Every cell with a nonzero channel becomes an active pillar.
CprTensor DenseToCpr(const DenseTensor& dense, Precision precision);

// Gathers the pillars of `t` at `coords` (zero-fill for cells absent in t).
CprTensor Restrict(const CprTensor& t, const CprCoords& coords);

class ConvVariant {
 public:
  enum class Kind : int {
    kSpConv = 0,
    kSpConvS = 1,
    kSpConvP = 2,
    kSpStConv = 3,
    kSpDeconv = 4,
  };

  ConvVariant() = default;
  static ConvVariant SpConv() { return ConvVariant(Kind::kSpConv, 0.0); }
  static ConvVariant SpConvS() { return ConvVariant(Kind::kSpConvS, 0.0); }
  static ConvVariant SpConvP(double threshold);
  static ConvVariant SpStConv() { return ConvVariant(Kind::kSpStConv, 0.0); }
  static ConvVariant SpDeconv() { return ConvVariant(Kind::kSpDeconv, 0.0); }
  static ConvVariant Parse(std::string_view name, double threshold = 0.0);

  Kind kind() const { return kind_; }
  double threshold() const { return threshold_; }
  int stride() const;
  int kernel_positions() const { return kind_ == Kind::kSpDeconv ? 4 : 9; }
  bool is_deconv() const { return kind_ == Kind::kSpDeconv; }
  bool is_strided() const { return kind_ == Kind::kSpStConv; }
  std::string_view name() const;

  friend bool operator==(const ConvVariant&, const ConvVariant&) = default;

 private:
  ConvVariant(Kind kind, double threshold)
      : kind_(kind), threshold_(threshold) {}

  Kind kind_ = Kind::kSpConv;
  double threshold_ = 0.0;
};

inline constexpr ConvVariant::Kind kAllVariantKinds[] = {
    ConvVariant::Kind::kSpConv, ConvVariant::Kind::kSpConvS,
    ConvVariant::Kind::kSpConvP, ConvVariant::Kind::kSpStConv,
    ConvVariant::Kind::kSpDeconv};

GridDims OutputDims(const ConvVariant& variant, GridDims in);

struct KernelPos {
  int dr = 0;  // conv: input row - output row; deconv: output row offset
  int dc = 0;  // conv: output col - input col; deconv: output col offset
};

KernelPos KernelPosition(const ConvVariant& variant, int k);
int KernelIndex(int dr, int dc);  // 3x3 only

// K x C x M int8 weights.
struct WeightKernel {
  int32_t positions = 9;
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  std::vector<int8_t> values;

  WeightKernel() = default;
  WeightKernel(int32_t k, int32_t c, int32_t m)
      : positions(k),
        in_channels(c),
        out_channels(m),
        values(static_cast<size_t>(k) * c * m, 0) {}

  int8_t& at(int32_t k, int32_t c, int32_t m) {
    return values[(static_cast<size_t>(k) * in_channels + c) * out_channels +
                  m];
  }
  int8_t at(int32_t k, int32_t c, int32_t m) const {
    return values[(static_cast<size_t>(k) * in_channels + c) * out_channels +
                  m];
  }
  // C x M matrix for one kernel position.
  std::span<const int8_t> matrix(int32_t k) const {
    return {values.data() + static_cast<size_t>(k) * in_channels * out_channels,
            static_cast<size_t>(in_channels) * out_channels};
  }
};

struct RequantSpec {
  int32_t shift = 0;
  static constexpr int32_t kMin = -128;
  static constexpr int32_t kMax = 127;
};

enum class RepresentativeKind { kL2, kMaxAbs, kL1 };

double RepresentativeValue(std::span<const int32_t> pillar,
                           RepresentativeKind kind = RepresentativeKind::kL2);

int8_t RequantizeValue(int32_t acc, const RequantSpec& spec);
std::vector<int8_t> Requantize(std::span<const int32_t> acc,
                               const RequantSpec& spec);
// Applies requantization to every feature of an accumulator tensor.
CprTensor RequantizeTensor(const CprTensor& acc, const RequantSpec& spec);

}  // namespace pillarflow

#endif  // PILLARFLOW_CORE_HPP_
