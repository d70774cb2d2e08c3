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

#pragma once

// Decoder conditioning on a predicted answer box: pixel re-encoding (mask,
// crop) and patch-level masks (token pruning, attention masking).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "coex/geometry.hpp"
#include "coex/heatmap.hpp"

namespace coex {

/// Planar page raster, 1 or 3 channels, values in [0, 1].
struct RasterPage {
  std::vector<Grid<float>> planes;

  RasterPage() = default;
  RasterPage(int height, int width, int channels, float value = 0.0f)
      : planes(channels, Grid<float>::Constant(height, width, value)) {}

  int channels() const { return static_cast<int>(planes.size()); }
  int height() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int width() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }

  void validate() const {
    require(channels() == 1 || channels() == 3, "page must have 1 or 3 channels");
    require(height() >= 1 && width() >= 1, "page must be non-empty");
    for (const auto& p : planes) {
      require(p.rows() == height() && p.cols() == width(), "page planes differ in size");
      require(p.allFinite(), "page has non-finite pixels");
    }
  }

  bool operator==(const RasterPage& o) const {
    if (channels() != o.channels()) return false;
    for (int c = 0; c < channels(); ++c)
      if (planes[c].rows() != o.planes[c].rows() || planes[c].cols() != o.planes[c].cols() ||
          !(planes[c] == o.planes[c]).all())
        return false;
    return true;
  }
};

/// Half-open pixel rectangle [row0, row1) x [col0, col1).
struct PixelRect {
  int row0 = 0, row1 = 0, col0 = 0, col1 = 0;

  bool empty() const { return row1 <= row0 || col1 <= col0; }
  long long pixel_count() const {
    return empty() ? 0 : static_cast<long long>(row1 - row0) * (col1 - col0);
  }
};

/// Pixels covered by a relative box: floor on low edges, ceil on high edges.
/// A zero-width or zero-height box covers nothing.
inline PixelRect pixel_rect(const CornerBox& b, int height, int width) {
  if (!(b.width() > 0) || !(b.height() > 0)) return {};
  PixelRect r;
  r.col0 = std::clamp(static_cast<int>(std::floor(b.x1 * width)), 0, width);
  r.col1 = std::clamp(static_cast<int>(std::ceil(b.x2 * width)), 0, width);
  r.row0 = std::clamp(static_cast<int>(std::floor(b.y1 * height)), 0, height);
  r.row1 = std::clamp(static_cast<int>(std::ceil(b.y2 * height)), 0, height);
  return r;
}

/// Keeps pixels inside the box and sets the rest to `fill`.
inline RasterPage mask_reencode(const RasterPage& x, const CornerBox& b, float fill = 1.0f) {
  x.validate();
  require(b.is_valid(), "invalid box");
  const PixelRect r = pixel_rect(b, x.height(), x.width());
  RasterPage out(x.height(), x.width(), x.channels(), fill);
  if (r.empty()) return out;
  const int h = r.row1 - r.row0, w = r.col1 - r.col0;
  for (int c = 0; c < x.channels(); ++c)
    out.planes[c].block(r.row0, r.col0, h, w) = x.planes[c].block(r.row0, r.col0, h, w);
  return out;
}

/// Crops the box region and stretches it back to the page size with
/// bilinear interpolation. Throws when the box covers no pixels.
inline RasterPage crop_reencode(const RasterPage& x, const CornerBox& b) {
  x.validate();
  require(b.is_valid(), "invalid box");
  const PixelRect r = pixel_rect(b, x.height(), x.width());
  require(!r.empty(), "crop box covers no pixels");
  RasterPage out;
  for (const auto& plane : x.planes) {
    const Grid<float> crop = plane.block(r.row0, r.col0, r.row1 - r.row0, r.col1 - r.col0);
    out.planes.push_back(resize_bilinear(crop, x.height(), x.width()));
  }
  return out;
}

/// Squared elliptical distance term of the Gaussian token weight,
/// weight = exp(-q). Sigmas are the box half-extents floored at one patch.
inline Heatmap token_prune_exponents(GridShape g, const CentreBox& b) {
  require(g.rows >= 1 && g.cols >= 1, "grid must be non-empty");
  require(b.w > 0 && b.h > 0, "token-prune box has zero width or height");
  const double sx = std::max(b.w / 2, 1.0 / g.cols);
  const double sy = std::max(b.h / 2, 1.0 / g.rows);
  Heatmap q(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const auto [px, py] = patch_centre(g, r, c);
      q(r, c) = (px - b.cx) * (px - b.cx) / (2 * sx * sx) + (py - b.cy) * (py - b.cy) / (2 * sy * sy);
    }
  return q;
}

inline Heatmap token_prune_weights(GridShape g, const CentreBox& b) {
  return (-token_prune_exponents(g, b)).exp();
}

/// Keeps patches whose Gaussian weight is at least the ceil(P/2)-th largest
/// weight, so at least half the grid survives and ties never drop below it.
/// Ranking uses the exponent, which avoids underflow ties far from the box.
inline MaskGrid token_prune_mask(GridShape g, const CentreBox& b) {
  const Heatmap q = token_prune_exponents(g, b);
  std::vector<double> sorted(q.data(), q.data() + q.size());
  const std::size_t keep = (sorted.size() + 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(keep - 1), sorted.end());
  const double cut = sorted[keep - 1];
  return q <= cut;
}

struct AttentionMask {
  MaskGrid mask;
  bool fallback = false;  // no patch centre inside the box
};

/// Patches whose centre lies inside the box. An empty result is replaced by
/// the single patch nearest the box centre and flagged.
inline AttentionMask attention_mask(GridShape g, const CornerBox& b) {
  require(g.rows >= 1 && g.cols >= 1, "grid must be non-empty");
  AttentionMask out{box_indicator(g, b), false};
  if (out.mask.any()) return out;
  out.fallback = true;
  double best = std::numeric_limits<double>::infinity();
  int br = 0, bc = 0;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const auto [px, py] = patch_centre(g, r, c);
      const double d = std::hypot(px - b.centre_x(), py - b.centre_y());
      if (d < best) {
        best = d;
        br = r;
        bc = c;
      }
    }
  out.mask(br, bc) = true;
  return out;
}

}  // namespace coex
