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

// Patch-grid heatmaps: retriever-score aggregation, grid-to-grid resampling
// through page resolution, variance/normalization/border post-processing,
// and top-k binarization.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "coex/geometry.hpp"
#include "coex/types.hpp"

namespace coex {

/// Token-by-patch similarity scores; row t holds token t over the source
/// patch grid in row-major order.
template <typename Scalar>
struct SimilarityMatrixT {
  GridShape grid;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> scores;

  int n_tokens() const { return static_cast<int>(scores.rows()); }
};
using SimilarityMatrix = SimilarityMatrixT<double>;

/// Luminance page image, values in [0, 1].
using GrayImage = Grid<double>;

struct PageSize {
  int height = 0;
  int width = 0;
};

/// Centre of patch (r, c) in relative page coordinates.
inline std::pair<double, double> patch_centre(GridShape g, int r, int c) {
  return {(c + 0.5) / g.cols, (r + 0.5) / g.rows};
}

/// Per-patch max over tokens, negatives clamped to zero.
template <typename Scalar>
Grid<Scalar> aggregate_max(const SimilarityMatrixT<Scalar>& sim) {
  require(sim.n_tokens() >= 1, "similarity matrix has no tokens");
  require(sim.scores.cols() == sim.grid.size(), "similarity matrix width != rows*cols");
  Grid<Scalar> out(sim.grid.rows, sim.grid.cols);
  out.template reshaped<Eigen::RowMajor>() = sim.scores.colwise().maxCoeff().array().max(Scalar(0)).transpose();
  return out;
}

/// Patch grid for a page under a patch budget, following the page aspect
/// ratio. Always rows * cols <= budget.
inline GridShape patch_grid_for(int width_px, int height_px, int budget = 512) {
  require(width_px >= 1 && height_px >= 1, "page dimensions must be positive");
  require(budget >= 1, "patch budget must be positive");
  const double aspect = static_cast<double>(width_px) / height_px;
  int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(budget * aspect))));
  cols = std::min(cols, budget);
  int rows = std::max(1, budget / cols);
  while (rows * cols > budget && cols > 1) {
    --cols;
    rows = std::max(1, budget / cols);
  }
  return {rows, cols};
}

namespace detail {

/// Catmull-Rom weights (a = -0.5) for fractional offset t in [0, 1).
inline std::array<double, 4> catmull_rom(double t) {
  constexpr double a = -0.5;
  auto near = [](double x) { return ((a + 2) * x - (a + 3)) * x * x + 1; };
  auto far = [](double x) { return ((a * x - 5 * a) * x + 8 * a) * x - 4 * a; };
  return {far(1 + t), near(t), near(1 - t), far(2 - t)};
}

struct Tap {
  int index;
  double weight;
};
using TapTable = std::vector<std::vector<Tap>>;

/// Bicubic taps with half-pixel alignment; sample indices clamp at the edges.
inline TapTable bicubic_taps(int in, int out) {
  TapTable taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double src = (o + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const auto w = catmull_rom(src - base);
    for (int k = 0; k < 4; ++k) {
      const int idx = std::clamp(static_cast<int>(base) - 1 + k, 0, in - 1);
      taps[o].push_back({idx, w[k]});
    }
  }
  return taps;
}

/// Area-weighted taps: output cell o averages the input cells it overlaps,
/// weighted by overlap length.
inline TapTable area_taps(int in, int out) {
  TapTable taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int i = first; i <= last; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0) taps[o].push_back({i, overlap / scale});
    }
  }
  return taps;
}

/// Bilinear taps with half-pixel alignment, coordinates clamped to the
/// sample range.
inline TapTable bilinear_taps(int in, int out) {
  TapTable taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, in - 1.0);
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in - 1);
    const double t = src - i0;
    if (t == 0.0 || i0 == i1) {
      taps[o].push_back({i0, 1.0});
    } else {
      taps[o].push_back({i0, 1.0 - t});
      taps[o].push_back({i1, t});
    }
  }
  return taps;
}

template <typename Scalar>
Grid<Scalar> apply_separable(const Grid<Scalar>& in, const TapTable& row_taps,
                             const TapTable& col_taps) {
  const Eigen::Index out_rows = static_cast<Eigen::Index>(row_taps.size());
  const Eigen::Index out_cols = static_cast<Eigen::Index>(col_taps.size());
  Grid<Scalar> tmp(in.rows(), out_cols);
  for (Eigen::Index r = 0; r < in.rows(); ++r)
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      double acc = 0;
      for (const Tap& t : col_taps[c]) acc += t.weight * static_cast<double>(in(r, t.index));
      tmp(r, c) = static_cast<Scalar>(acc);
    }
  Grid<Scalar> out(out_rows, out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r)
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      double acc = 0;
      for (const Tap& t : row_taps[r]) acc += t.weight * static_cast<double>(tmp(t.index, c));
      out(r, c) = static_cast<Scalar>(acc);
    }
  return out;
}

}  // namespace detail

template <typename Derived>
Grid<typename Derived::Scalar> resize_bicubic(const Eigen::ArrayBase<Derived>& in, int rows,
                                              int cols) {
  require(rows >= 1 && cols >= 1 && in.size() > 0, "resize to an empty grid");
  return detail::apply_separable<typename Derived::Scalar>(
      in, detail::bicubic_taps(static_cast<int>(in.rows()), rows),
      detail::bicubic_taps(static_cast<int>(in.cols()), cols));
}

template <typename Derived>
Grid<typename Derived::Scalar> resize_area(const Eigen::ArrayBase<Derived>& in, int rows,
                                           int cols) {
  require(rows >= 1 && cols >= 1 && in.size() > 0, "resize to an empty grid");
  return detail::apply_separable<typename Derived::Scalar>(
      in, detail::area_taps(static_cast<int>(in.rows()), rows),
      detail::area_taps(static_cast<int>(in.cols()), cols));
}

template <typename Derived>
Grid<typename Derived::Scalar> resize_bilinear(const Eigen::ArrayBase<Derived>& in, int rows,
                                               int cols) {
  require(rows >= 1 && cols >= 1 && in.size() > 0, "resize to an empty grid");
  return detail::apply_separable<typename Derived::Scalar>(
      in, detail::bilinear_taps(static_cast<int>(in.rows()), rows),
      detail::bilinear_taps(static_cast<int>(in.cols()), cols));
}

/// Source grid -> page pixels (bicubic) -> target grid (area-weighted
/// bilinear). Negative overshoot is clamped to zero.
template <typename Derived>
Grid<typename Derived::Scalar> resample(const Eigen::ArrayBase<Derived>& h, PageSize page,
                                        GridShape target) {
  using Scalar = typename Derived::Scalar;
  require(page.height >= 1 && page.width >= 1, "page dimensions must be positive");
  require(target.rows >= 1 && target.cols >= 1, "target grid must be non-empty");
  const Grid<Scalar> pixels = resize_bicubic(h, page.height, page.width);
  return resize_area(pixels, target.rows, target.cols).max(Scalar(0));
}

/// Variance of `page` over window x window neighbourhoods, the window
/// clipped at the image edges.
inline GrayImage local_variance(const GrayImage& page, int window) {
  require(window >= 1 && window % 2 == 1, "variance window must be odd and >= 1");
  const Eigen::Index H = page.rows(), W = page.cols();
  // Integral images with a zero top row/left column.
  Grid<double> s = Grid<double>::Zero(H + 1, W + 1), s2 = Grid<double>::Zero(H + 1, W + 1);
  for (Eigen::Index r = 0; r < H; ++r)
    for (Eigen::Index c = 0; c < W; ++c) {
      const double v = page(r, c);
      s(r + 1, c + 1) = v + s(r, c + 1) + s(r + 1, c) - s(r, c);
      s2(r + 1, c + 1) = v * v + s2(r, c + 1) + s2(r + 1, c) - s2(r, c);
    }
  const Eigen::Index half = window / 2;
  GrayImage var(H, W);
  for (Eigen::Index r = 0; r < H; ++r)
    for (Eigen::Index c = 0; c < W; ++c) {
      const Eigen::Index r0 = std::max<Eigen::Index>(0, r - half), r1 = std::min(H, r + half + 1);
      const Eigen::Index c0 = std::max<Eigen::Index>(0, c - half), c1 = std::min(W, c + half + 1);
      const double n = static_cast<double>((r1 - r0) * (c1 - c0));
      const double sum = s(r1, c1) - s(r0, c1) - s(r1, c0) + s(r0, c0);
      const double sum2 = s2(r1, c1) - s2(r0, c1) - s2(r1, c0) + s2(r0, c0);
      const double v = sum2 / n - (sum / n) * (sum / n);
      // Integral-image cancellation noise on flat regions.
      var(r, c) = v > 1e-12 ? v : 0.0;
    }
  return var;
}

/// Patch weights in [0, 1] from local page variance: mean-pooled onto the
/// grid and divided by the maximum. A flat page gives all ones.
inline Heatmap variance_weights(const GrayImage& page, GridShape grid, int window) {
  Heatmap w = resize_area(local_variance(page, window), grid.rows, grid.cols).max(0.0);
  const double m = w.maxCoeff();
  if (!(m > 0)) return Heatmap::Ones(grid.rows, grid.cols);
  return w / m;
}

/// Per-map min-max scaling to [0, 1]; a constant map becomes all zeros.
template <typename Derived>
Grid<typename Derived::Scalar> minmax_normalize(const Eigen::ArrayBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  const Scalar lo = h.minCoeff(), hi = h.maxCoeff();
  if (!(hi > lo)) return Grid<Scalar>::Zero(h.rows(), h.cols());
  return ((h - lo) / (hi - lo)).min(Scalar(1)).max(Scalar(0));
}

/// Zeroes patches whose centre lies within `border_frac` of any page edge.
template <typename Scalar>
void suppress_border(Grid<Scalar>& h, double border_frac) {
  const GridShape g = shape_of(h);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const auto [x, y] = patch_centre(g, r, c);
      if (x < border_frac || x > 1.0 - border_frac || y < border_frac || y > 1.0 - border_frac)
        h(r, c) = Scalar(0);
    }
}

struct PostprocessOptions {
  int window = 15;
  double border_frac = 0.07;
};

/// Variance weighting, min-max normalization, then border suppression.
/// `h` must already be on the patch grid aligned with `page`.
inline Heatmap postprocess(const Heatmap& h, const GrayImage& page,
                           const PostprocessOptions& opt = {}) {
  require(opt.window >= 1 && opt.window % 2 == 1, "variance window must be odd and >= 1");
  require(opt.border_frac >= 0.0 && opt.border_frac < 0.5, "border fraction must lie in [0, 0.5)");
  require(page.size() > 0, "page image is empty");
  Heatmap out = minmax_normalize(h * variance_weights(page, shape_of(h), opt.window));
  suppress_border(out, opt.border_frac);
  return out;
}

/// Number of patches selected by a top-k fraction: ceil(k * n). The small
/// slack absorbs products like 0.7 * 10 landing a hair above an integer.
inline int topk_count(double k, int n) {
  require(k > 0.0 && k <= 1.0, "top-k fraction must lie in (0, 1]");
  return std::clamp(static_cast<int>(std::ceil(k * n - 1e-9)), 0, n);
}

/// Marks the ceil(k * P) largest patches; ties go to the lower row-major index.
template <typename Derived>
MaskGrid topk_binarize(const Eigen::ArrayBase<Derived>& h, double k) {
  const int n = static_cast<int>(h.size());
  const int count = topk_count(k, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto flat = h.derived().template reshaped<Eigen::RowMajor>();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return flat(a) > flat(b); });
  MaskGrid out = MaskGrid::Constant(h.rows(), h.cols(), false);
  auto out_flat = out.reshaped<Eigen::RowMajor>();
  for (int i = 0; i < count; ++i) out_flat(order[i]) = true;
  return out;
}

/// True where the patch centre lies inside `b` (closed edges).
inline MaskGrid box_indicator(GridShape g, const CornerBox& b) {
  MaskGrid m(g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const auto [x, y] = patch_centre(g, r, c);
      m(r, c) = b.contains_point(x, y);
    }
  return m;
}

}  // namespace coex
