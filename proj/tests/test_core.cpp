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
#include <limits>

#include "pillarflow/core.hpp"
#include "pillarflow/oracle.hpp"
#include "test_util.hpp"

using namespace pillarflow;

TEST_CASE("BuildCpr: empty grid") {
  auto t = BuildCpr({}, {}, {16, 16}, 4);
  CHECK(t.pillar_count() == 0);
  CHECK(t.coords().row_starts == std::vector<int32_t>(17, 0));
  t.Validate();
}

TEST_CASE("BuildCpr: sorts row-major and assigns global indices") {
  std::vector<Coord> coords{{1, 2}, {1, 1}, {2, 4}};
  std::vector<int32_t> feats{12, 11, 24};
  auto t = BuildCpr(coords, feats, {4, 8}, 1);
  t.Validate();
  CHECK(t.coords().at(0) == Coord{1, 1});
  CHECK(t.coords().at(1) == Coord{1, 2});
  CHECK(t.coords().at(2) == Coord{2, 4});
  CHECK(t.coords().row_starts == std::vector<int32_t>{0, 0, 2, 3, 3});
  CHECK(t.feature(0)[0] == 11);
  CHECK(t.feature(2)[0] == 24);
}

TEST_CASE("BuildCpr: error paths") {
  std::vector<Coord> dup{{1, 1}, {1, 1}};
  std::vector<int32_t> f2{1, 2};
  try {
    BuildCpr(dup, f2, {4, 4}, 1);
    FAIL("expected DuplicateCoordinate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDuplicateCoordinate);
  }
  std::vector<Coord> oob{{0, 4}};
  std::vector<int32_t> f1{1};
  try {
    BuildCpr(oob, f1, {4, 4}, 1);
    FAIL("expected CoordinateOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCoordinateOutOfBounds);
  }
}

TEST_CASE("CPR round-trips through the dense form") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // Nonzero features so every active pillar survives densification.
    auto coords = pftest::RandomCoords(rng, {128, 128}, 500);
    auto feats = pftest::RandomInt8(rng, coords.size() * 3, 1, 127);
    auto t = BuildCpr(coords, feats, {128, 128}, 3);
    t.Validate();
    auto back = DenseToCpr(CprToDense(t), Precision::kInt8);
    CHECK(back == t);
    // Global index order equals row-major rank.
    auto list = t.coords().ToList();
    CHECK(std::is_sorted(list.begin(), list.end()));
  }
}

TEST_CASE("CprToDense: single pillar and empty") {
  auto empty = CprToDense(BuildCpr({}, {}, {8, 8}, 2));
  CHECK(std::all_of(empty.data.begin(), empty.data.end(),
                    [](int32_t v) { return v == 0; }));
  std::vector<Coord> c{{5, 5}};
  std::vector<int32_t> f{7};
  auto d = CprToDense(BuildCpr(c, f, {8, 8}, 1));
  int nonzero = 0;
  for (int32_t v : d.data) nonzero += v != 0;
  CHECK(nonzero == 1);
  CHECK(d.at(0, 5, 5) == 7);
}

TEST_CASE("RepresentativeValue") {
  std::vector<int32_t> zero{0, 0, 0};
  std::vector<int32_t> tri{3, 4};
  CHECK(RepresentativeValue(zero) == 0.0);
  CHECK(RepresentativeValue(tri) == 5.0);
  CHECK(RepresentativeValue(tri, RepresentativeKind::kMaxAbs) == 4.0);
  CHECK(RepresentativeValue(tri, RepresentativeKind::kL1) == 7.0);

  // Independent oracle: long double summation in reverse order.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int32_t> d(-2000000, 2000000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int32_t> v(1 + trial % 64);
    for (auto& x : v) x = d(rng);
    long double s = 0;
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
      s += static_cast<long double>(*it) * static_cast<long double>(*it);
    }
    const double expect = static_cast<double>(std::sqrt(s));
    const double got = RepresentativeValue(v);
    CHECK(std::fabs(got - expect) <=
          std::nextafter(expect, std::numeric_limits<double>::infinity()) - expect);
  }
}

TEST_CASE("Requantize: shift and saturation") {
  RequantSpec s{4};
  CHECK(RequantizeValue(256, s) == 16);
  CHECK(RequantizeValue(100000, s) == 127);
  CHECK(RequantizeValue(-100000, s) == -128);
  CHECK(RequantizeValue(-17, s) == -2);  // arithmetic shift rounds down
  std::vector<int32_t> acc{256, 100000, -100000};
  CHECK(Requantize(acc, s) == std::vector<int8_t>{16, 127, -128});
}

TEST_CASE("ActiveSetOracle: per-variant geometry") {
  const GridDims g{16, 16};
  auto single = [&](int r, int c) {
    std::vector<Coord> v{{r, c}};
    return BuildCprCoords(v, g);
  };
  auto s = ActiveSetOracle(single(5, 5), ConvVariant::SpConv());
  CHECK(s.size() == 9);
  CHECK(s.at(0) == Coord{4, 4});
  CHECK(s.at(8) == Coord{6, 6});
  CHECK(ActiveSetOracle(single(0, 0), ConvVariant::SpConv()).ToList() ==
        std::vector<Coord>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(ActiveSetOracle(single(5, 5), ConvVariant::SpConvS()).ToList() ==
        std::vector<Coord>{{5, 5}});

  // Output o reaches input (3,3) iff |2*o - 3| <= 1 per axis.
  std::vector<Coord> expect;
  for (int orow = 0; orow < 8; ++orow) {
    for (int ocol = 0; ocol < 8; ++ocol) {
      if (std::abs(2 * orow - 3) <= 1 && std::abs(2 * ocol - 3) <= 1) {
        expect.push_back({orow, ocol});
      }
    }
  }
  CHECK(expect == std::vector<Coord>{{1, 1}, {1, 2}, {2, 1}, {2, 2}});
  auto st = ActiveSetOracle(single(3, 3), ConvVariant::SpStConv());
  CHECK(st.dims == GridDims{8, 8});
  CHECK(st.ToList() == expect);

  CHECK(ActiveSetOracle(single(3, 3), ConvVariant::SpDeconv()).ToList() ==
        std::vector<Coord>{{6, 6}, {6, 7}, {7, 6}, {7, 7}});
}

TEST_CASE("ActiveSetOracle: SpConvS identity and SpDeconv 4P") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto coords = BuildCprCoords(pftest::RandomCoords(rng, {24, 24}, 1 + trial * 3),
                                 {24, 24});
    CHECK(ActiveSetOracle(coords, ConvVariant::SpConvS()) == coords);
    CHECK(ActiveSetOracle(coords, ConvVariant::SpDeconv()).size() ==
          4 * coords.size());
  }
}

TEST_CASE("DenseConvOracle: identity kernel") {
  const int C = 3;
  WeightKernel w(9, C, C);
  for (int c = 0; c < C; ++c) w.at(KernelIndex(0, 0), c, c) = 1;
  std::vector<Coord> coords{{5, 5}};
  std::vector<int32_t> f{4, -9, 100};
  auto t = BuildCpr(coords, f, {12, 12}, C);
  auto res = DenseConvOracle(CprToDense(t), w, ConvVariant::SpConv(), t.coords());
  CHECK(res.active_out.size() == 9);
  for (int c = 0; c < C; ++c) CHECK(res.acc.at(c, 5, 5) == f[c]);
  CHECK(res.acc.at(0, 4, 4) == 0);

  auto sub = DenseConvOracle(CprToDense(t), w, ConvVariant::SpConvS(), t.coords());
  CHECK(sub.active_out.ToList() == std::vector<Coord>{{5, 5}});
}

TEST_CASE("DenseConvOracle: SpStConv equals direct stride-2 accumulation") {
  std::mt19937_64 rng(5);
  const GridDims g{32, 32};
  const int C = 4, M = 3;
  auto t = pftest::RandomTensor(rng, g, 102, C);
  auto w = pftest::RandomWeights(rng, 9, C, M);
  auto res = DenseConvOracle(CprToDense(t), w, ConvVariant::SpStConv(), t.coords());
  CHECK(res.acc.dims == GridDims{16, 16});
  // Scatter-form computation over active inputs, cell by cell.
  auto inputs = t.coords().ToList();
  for (const Coord& o : res.active_out.ToList()) {
    for (int m = 0; m < M; ++m) {
      int64_t acc = 0;
      for (size_t i = 0; i < inputs.size(); ++i) {
        const int dr = inputs[i].row - 2 * o.row;
        const int dc = 2 * o.col - inputs[i].col;
        if (std::abs(dr) > 1 || std::abs(dc) > 1) continue;
        for (int c = 0; c < C; ++c) {
          acc += int64_t{t.feature(static_cast<int32_t>(i))[c]} *
                 w.at(KernelIndex(dr, dc), c, m);
        }
      }
      CHECK(res.acc.at(m, o.row, o.col) == acc);
    }
  }
}

TEST_CASE("DenseConvOracle: shape mismatch") {
  WeightKernel w(9, 2, 2);
  auto t = BuildCpr({}, {}, {4, 4}, 3);
  CHECK_THROWS_AS(DenseConvOracle(CprToDense(t), w, ConvVariant::SpConv(), t.coords()),
                  Error);
}
