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

// Relative-coordinate boxes and exact overlap primitives.

#include <algorithm>
#include <cmath>

#include "coex/types.hpp"

namespace coex {

template <typename Scalar>
struct CornerBoxT {
  Scalar x1{0}, y1{0}, x2{0}, y2{0};

  Scalar width() const { return x2 - x1; }
  Scalar height() const { return y2 - y1; }
  Scalar area() const { return width() * height(); }
  Scalar centre_x() const { return (x1 + x2) / 2; }
  Scalar centre_y() const { return (y1 + y2) / 2; }

  bool is_valid() const {
    return Scalar(0) <= x1 && x1 <= x2 && x2 <= Scalar(1) && Scalar(0) <= y1 && y1 <= y2 &&
           y2 <= Scalar(1);
  }

  bool contains(const CornerBoxT& o) const {
    return x1 <= o.x1 && y1 <= o.y1 && o.x2 <= x2 && o.y2 <= y2;
  }

  /// Point containment, closed on all edges.
  bool contains_point(Scalar x, Scalar y) const { return x1 <= x && x <= x2 && y1 <= y && y <= y2; }

  CornerBoxT transposed() const { return {y1, x1, y2, x2}; }

  bool operator==(const CornerBoxT&) const = default;
};

template <typename Scalar>
struct CentreBoxT {
  Scalar cx{0}, cy{0}, w{0}, h{0};

  bool operator==(const CentreBoxT&) const = default;
};

using CornerBox = CornerBoxT<double>;
using CentreBox = CentreBoxT<double>;

/// Throws unless 0 <= x1 <= x2 <= 1 and likewise for y.
template <typename Scalar>
CornerBoxT<Scalar> checked_box(Scalar x1, Scalar y1, Scalar x2, Scalar y2) {
  CornerBoxT<Scalar> b{x1, y1, x2, y2};
  require(b.is_valid(), "box outside [0,1] or with inverted corners");
  return b;
}

template <typename Scalar>
Scalar clip01(Scalar v) {
  return std::clamp(v, Scalar(0), Scalar(1));
}

template <typename Scalar>
CornerBoxT<Scalar> clip(const CornerBoxT<Scalar>& b) {
  CornerBoxT<Scalar> out{clip01(b.x1), clip01(b.y1), clip01(b.x2), clip01(b.y2)};
  out.x2 = std::max(out.x1, out.x2);
  out.y2 = std::max(out.y1, out.y2);
  return out;
}

/// Corner form without clipping. Losses differentiate through this.
template <typename Scalar>
CornerBoxT<Scalar> to_corner_unclipped(const CentreBoxT<Scalar>& b) {
  return {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2};
}

template <typename Scalar>
CornerBoxT<Scalar> to_corner(const CentreBoxT<Scalar>& b) {
  return clip(to_corner_unclipped(b));
}

template <typename Scalar>
CentreBoxT<Scalar> to_centre(const CornerBoxT<Scalar>& b) {
  return {b.centre_x(), b.centre_y(), b.width(), b.height()};
}

template <typename Scalar>
Scalar intersection_area(const CornerBoxT<Scalar>& a, const CornerBoxT<Scalar>& b) {
  const Scalar iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const Scalar ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return std::max(Scalar(0), iw) * std::max(Scalar(0), ih);
}

/// Clamped below by both areas so rounding never puts the union under
/// either box, which keeps IoU <= coverage exact in floating point.
template <typename Scalar>
Scalar union_area(const CornerBoxT<Scalar>& a, const CornerBoxT<Scalar>& b) {
  const Scalar aa = a.area(), ba = b.area();
  return std::max({aa + ba - intersection_area(a, b), aa, ba});
}

template <typename Scalar>
CornerBoxT<Scalar> enclosing_box(const CornerBoxT<Scalar>& a, const CornerBoxT<Scalar>& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

/// Intersection over union. A pair with zero union area scores 0 and sets
/// `*degenerate` when the pointer is given.
template <typename Scalar>
Scalar iou(const CornerBoxT<Scalar>& a, const CornerBoxT<Scalar>& b, bool* degenerate = nullptr) {
  const Scalar u = union_area(a, b);
  if (degenerate) *degenerate = !(u > Scalar(0));
  if (!(u > Scalar(0))) return Scalar(0);
  return intersection_area(a, b) / u;
}

/// Generalized IoU: IoU - |C \ (A u B)| / |C| with C the minimal enclosing
/// box. Range [-1, 1]. Zero-area enclosure scores 0 and flags `*degenerate`.
template <typename Scalar>
Scalar giou(const CornerBoxT<Scalar>& a, const CornerBoxT<Scalar>& b, bool* degenerate = nullptr) {
  const Scalar c = enclosing_box(a, b).area();
  const Scalar u = union_area(a, b);
  const bool bad = !(c > Scalar(0)) || !(u > Scalar(0));
  if (degenerate) *degenerate = bad;
  if (bad) return Scalar(0);
  return intersection_area(a, b) / u - (c - u) / c;
}

}  // namespace coex
