// Copyright 2026 The CoEx Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <set>

#include "doctest.h"

#include "coex/conditioning.hpp"

using namespace coex;
using doctest::Approx;

namespace {

RasterPage random_page(std::mt19937_64& rng, int h, int w, int c) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  RasterPage p(h, w, c);
  for (auto& plane : p.planes)
    for (Eigen::Index i = 0; i < plane.size(); ++i) plane.data()[i] = u(rng);
  return p;
}

CornerBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  return {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
}

}  // namespace

TEST_CASE("mask re-encoding") {
  std::mt19937_64 rng(41);
  const RasterPage page = random_page(rng, 40, 60, 3);
  CHECK(mask_reencode(page, {0, 0, 1, 1}) == page);
  const RasterPage blank = mask_reencode(page, {0.3, 0.3, 0.3, 0.6});
  for (const auto& plane : blank.planes) CHECK((plane == 1.0f).all());
  // Quarter page: the complement count follows the rounded bounds.
  const RasterPage q = mask_reencode(page, {0.0, 0.0, 0.5, 0.5}, 0.25f);
  long filled = 0;
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 60; ++c) {
      const bool in = r < 20 && c < 30;
      if (!in) filled += q.planes[0](r, c) == 0.25f;
      if (in) CHECK(q.planes[0](r, c) == page.planes[0](r, c));
    }
  CHECK(filled == 40 * 60 - 20 * 30);
}

TEST_CASE("pixel rounding takes floor on low edges and ceil on high edges") {
  const PixelRect r = pixel_rect({0.101, 0.249, 0.399, 0.751}, 100, 10);
  CHECK(r.col0 == 1);
  CHECK(r.col1 == 4);
  CHECK(r.row0 == 24);
  CHECK(r.row1 == 76);
  CHECK(pixel_rect({0.5, 0.1, 0.5, 0.9}, 10, 10).empty());
}

TEST_CASE("mask re-encoding is idempotent and keeps range") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 100; ++t) {
    const RasterPage page = random_page(rng, 17, 23, t % 2 ? 3 : 1);
    const CornerBox b = random_box(rng);
    const RasterPage once = mask_reencode(page, b);
    CHECK(mask_reencode(once, b) == once);
    CHECK(once.height() == 17);
    CHECK(once.width() == 23);
  }
}

TEST_CASE("crop re-encoding") {
  std::mt19937_64 rng(43);
  const RasterPage page = random_page(rng, 30, 20, 1);
  const RasterPage same = crop_reencode(page, {0, 0, 1, 1});
  CHECK((same.planes[0] - page.planes[0]).abs().maxCoeff() < 1e-6f);

  RasterPage halves(10, 20, 1, 0.9f);
  halves.planes[0].leftCols(10).setConstant(0.3f);
  const RasterPage left = crop_reencode(halves, {0, 0, 0.5, 1});
  CHECK((left.planes[0] - 0.3f).abs().maxCoeff() < 1e-6f);

  // Affine ramp: a centred half-size crop stretches the ramp by two.
  RasterPage ramp(16, 16, 1);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) ramp.planes[0](r, c) = (c + 0.5f) / 32.0f;
  const RasterPage zoom = crop_reencode(ramp, {0.25, 0.25, 0.75, 0.75});
  for (int c = 1; c < 15; ++c) {
    // Half-pixel alignment: output column c samples crop column (c + 0.5) / 2 - 0.5.
    const double src = (c + 0.5) / 2.0 - 0.5 + 4.0;
    CHECK(zoom.planes[0](5, c) == Approx((src + 0.5) / 32.0).epsilon(1e-6));
  }
  CHECK_THROWS(crop_reencode(page, {0.5, 0.5, 0.5, 0.7}));
}

TEST_CASE("token prune keeps at least half the grid and the nearest patches") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> pos(0.0, 1.0), size(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    const GridShape g{1 + t % 7, 1 + (t / 7) % 9};
    const CentreBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const MaskGrid m = token_prune_mask(g, b);
    CHECK(m.count() >= (g.size() + 1) / 2);
  }
  // Brute-force oracle on a 4x4 grid: the kept set is the nearest patches.
  const GridShape g{4, 4};
  const CentreBox b{0.375, 0.375, 0.05, 0.05};
  const MaskGrid m = token_prune_mask(g, b);
  std::vector<std::pair<double, int>> dist;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const double dx = (c + 0.5) / 4 - b.cx, dy = (r + 0.5) / 4 - b.cy;
      dist.push_back({dx * dx + dy * dy, r * 4 + c});
    }
  std::sort(dist.begin(), dist.end());
  const double cut = dist[7].first;
  for (auto [d, i] : dist) CHECK(m.data()[i] == (d <= cut + 1e-15));
  CHECK_THROWS(token_prune_mask(g, CentreBox{0.5, 0.5, 0.0, 0.1}));
}

TEST_CASE("token prune is centrally symmetric for a centred box") {
  const GridShape g{6, 8};
  const MaskGrid m = token_prune_mask(g, CentreBox{0.5, 0.5, 0.3, 0.2});
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 8; ++c) CHECK(m(r, c) == m(5 - r, 7 - c));
  const MaskGrid wide = token_prune_mask(g, CentreBox{0.5, 0.5, 1.0, 1.0});
  CHECK(wide.count() >= 24);
  CHECK((token_prune_mask(g, CentreBox{0.5, 0.5, 1.0, 1.0}) == wide).all());
}

TEST_CASE("attention mask selects patch centres inside the box") {
  const GridShape g{4, 6};
  CHECK(attention_mask(g, {0, 0, 1, 1}).mask.all());
  const AttentionMask top = attention_mask(g, {0, 0, 1, 0.5});
  CHECK_FALSE(top.fallback);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) CHECK(top.mask(r, c) == (r < 2));
  // Smaller than a patch, centred on patch (2, 3).
  const double cx = 3.5 / 6, cy = 2.5 / 4;
  const AttentionMask tiny = attention_mask(g, {cx - 0.01, cy - 0.01, cx - 0.005, cy - 0.005});
  CHECK(tiny.fallback);
  CHECK(tiny.mask.count() == 1);
  CHECK(tiny.mask(2, 3));
}

TEST_CASE("attention mask is monotone under box inclusion") {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const GridShape g{1 + t % 9, 1 + t % 5};
    const CornerBox outer = random_box(rng);
    const CornerBox inner{outer.x1 + u(rng) * outer.width() / 2, outer.y1 + u(rng) * outer.height() / 2,
                          outer.x2 - u(rng) * outer.width() / 2, outer.y2 - u(rng) * outer.height() / 2};
    REQUIRE(outer.contains(inner));
    const AttentionMask a = attention_mask(g, inner), b = attention_mask(g, outer);
    // Centre sets are always nested; the fallback patch is only comparable
    // when neither side fell back.
    const MaskGrid ci = box_indicator(g, inner), co = box_indicator(g, outer);
    CHECK((ci && !co).count() == 0);
    if (!a.fallback && !b.fallback) CHECK((a.mask && !b.mask).count() == 0);
    CHECK(a.mask.count() >= 1);
  }
}
