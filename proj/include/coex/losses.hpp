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

// Box and heatmap supervision losses with analytic gradients, and the
// weighted training objective.

#include <algorithm>
#include <cmath>

#include "coex/geometry.hpp"
#include "coex/types.hpp"

namespace coex {

/// Partial derivatives of a scalar loss with respect to a centre-form box.
template <typename Scalar>
struct BoxGradT {
  Scalar d_cx{0}, d_cy{0}, d_w{0}, d_h{0};
};

/// Partial derivatives with respect to corner coordinates.
template <typename Scalar>
struct CornerGradT {
  Scalar d_x1{0}, d_y1{0}, d_x2{0}, d_y2{0};
};

template <typename Scalar>
struct BoxLossT {
  Scalar value{0};
  BoxGradT<Scalar> grad;
};

template <typename Scalar>
struct CornerLossT {
  Scalar value{0};
  CornerGradT<Scalar> grad;
};

using BoxGrad = BoxGradT<double>;
using BoxLoss = BoxLossT<double>;

struct LossWeights {
  double lambda_giou = 2.50;
  double lambda_centre = 2.00;
  double lambda_area = 0.02;
  double lambda_prior = 0.50;
  double lambda_dec = 0.25;
};

namespace detail {

/// Derivative of max(a, b) with respect to a, for da = 1, db = 0. Ties
/// split evenly, which is the mean of the two one-sided derivatives.
template <typename Scalar>
Scalar dmax_da(Scalar a, Scalar b) {
  return a > b ? Scalar(1) : (a < b ? Scalar(0) : Scalar(0.5));
}

template <typename Scalar>
Scalar dmin_da(Scalar a, Scalar b) {
  return Scalar(1) - dmax_da(a, b);
}

/// Derivative of max(0, v) given dv, ties split evenly.
template <typename Scalar>
Scalar drelu(Scalar v, Scalar dv) {
  return v > 0 ? dv : (v < 0 ? Scalar(0) : dv / 2);
}

template <typename Scalar>
void require_target(const CentreBoxT<Scalar>& t) {
  require(t.w > 0 && t.h > 0, "target box has zero width or height");
}

template <typename Scalar>
void require_pred(const CentreBoxT<Scalar>& p) {
  require(p.w >= 0 && p.h >= 0, "predicted box has negative width or height");
}

template <typename Scalar>
BoxGradT<Scalar> corner_to_centre(const CornerGradT<Scalar>& g) {
  return {g.d_x1 + g.d_x2, g.d_y1 + g.d_y2, (g.d_x2 - g.d_x1) / 2, (g.d_y2 - g.d_y1) / 2};
}

}  // namespace detail

/// 1 - GIoU(pred, target) on unclipped corner boxes, with its gradient in
/// corner coordinates. At kinks (aligned edges, touching boxes) each corner
/// coordinate gets the mean of its one-sided derivatives.
template <typename Scalar>
CornerLossT<Scalar> giou_loss_corners(const CornerBoxT<Scalar>& p, const CornerBoxT<Scalar>& t) {
  require(t.width() > 0 && t.height() > 0, "target box has zero width or height");
  require(p.width() >= 0 && p.height() >= 0, "predicted box has inverted corners");
  using detail::dmax_da;
  using detail::dmin_da;
  using detail::drelu;

  const Scalar pw = p.x2 - p.x1, ph = p.y2 - p.y1;
  const Scalar iw_raw = std::min(p.x2, t.x2) - std::max(p.x1, t.x1);
  const Scalar ih_raw = std::min(p.y2, t.y2) - std::max(p.y1, t.y1);
  const Scalar iw = std::max(Scalar(0), iw_raw), ih = std::max(Scalar(0), ih_raw);
  const Scalar cw = std::max(p.x2, t.x2) - std::min(p.x1, t.x1);
  const Scalar ch = std::max(p.y2, t.y2) - std::min(p.y1, t.y1);

  const Scalar I = iw * ih;
  const Scalar A = pw * ph;
  const Scalar U = A + t.area() - I;
  const Scalar C = cw * ch;

  CornerLossT<Scalar> out;
  out.value = Scalar(1) - (I / U + U / C - Scalar(1));

  // dGIoU = dI/U - I dU/U^2 + dU/C - U dC/C^2, with dU = dA - dI.
  auto dgiou = [&](Scalar dI, Scalar dA, Scalar dC) {
    const Scalar dU = dA - dI;
    return dI / U - I * dU / (U * U) + dU / C - U * dC / (C * C);
  };

  // Low edges: raising x1 can only shrink the intersection and the hull.
  {
    const Scalar d_ix = dmax_da(p.x1, t.x1);  // d max(x1, tx1)
    const Scalar d_cx = dmin_da(p.x1, t.x1);  // d min(x1, tx1)
    const Scalar dI = drelu(iw_raw, -d_ix) * ih;
    out.grad.d_x1 = -dgiou(dI, -ph, -d_cx * ch);
  }
  {
    const Scalar d_iy = dmax_da(p.y1, t.y1);
    const Scalar d_cy = dmin_da(p.y1, t.y1);
    const Scalar dI = drelu(ih_raw, -d_iy) * iw;
    out.grad.d_y1 = -dgiou(dI, -pw, -d_cy * cw);
  }
  // High edges.
  {
    const Scalar d_ix = dmin_da(p.x2, t.x2);  // d min(x2, tx2)
    const Scalar d_cx = dmax_da(p.x2, t.x2);  // d max(x2, tx2)
    const Scalar dI = drelu(iw_raw, d_ix) * ih;
    out.grad.d_x2 = -dgiou(dI, ph, d_cx * ch);
  }
  {
    const Scalar d_iy = dmin_da(p.y2, t.y2);
    const Scalar d_cy = dmax_da(p.y2, t.y2);
    const Scalar dI = drelu(ih_raw, d_iy) * iw;
    out.grad.d_y2 = -dgiou(dI, pw, d_cy * cw);
  }
  return out;
}

/// 1 - GIoU between centre-form boxes. Value in [0, 2].
template <typename Scalar>
BoxLossT<Scalar> giou_loss(const CentreBoxT<Scalar>& pred, const CentreBoxT<Scalar>& target) {
  detail::require_target(target);
  detail::require_pred(pred);
  const auto c = giou_loss_corners(to_corner_unclipped(pred), to_corner_unclipped(target));
  return {c.value, detail::corner_to_centre(c.grad)};
}

/// Euclidean distance between centres; zero gradient when they coincide.
template <typename Scalar>
BoxLossT<Scalar> centre_loss(const CentreBoxT<Scalar>& pred, const CentreBoxT<Scalar>& target) {
  const Scalar dx = pred.cx - target.cx, dy = pred.cy - target.cy;
  const Scalar d = std::hypot(dx, dy);
  BoxLossT<Scalar> out;
  out.value = d;
  if (d > 0) {
    out.grad.d_cx = dx / d;
    out.grad.d_cy = dy / d;
  }
  return out;
}

/// (sqrt(pred_area / target_area) - 1)^2. The derivative clamps the
/// predicted area at 1e-12 so collapsed boxes keep a finite gradient.
template <typename Scalar>
BoxLossT<Scalar> area_loss(const CentreBoxT<Scalar>& pred, const CentreBoxT<Scalar>& target) {
  detail::require_target(target);
  detail::require_pred(pred);
  constexpr Scalar kEps = Scalar(1e-12);
  const Scalar ta = target.w * target.h;
  const Scalar root = std::sqrt(pred.w * pred.h / ta);
  BoxLossT<Scalar> out;
  out.value = (root - 1) * (root - 1);
  const Scalar root_eps = std::sqrt(std::max(pred.w * pred.h, kEps) / ta);
  const Scalar k = (root_eps - 1) / root_eps / ta;  // dL/d(pred area)
  out.grad.d_w = k * pred.h;
  out.grad.d_h = k * pred.w;
  return out;
}

template <typename Scalar>
struct HeatmapLossT {
  Scalar value{0};
  Grid<Scalar> grad;
};

/// lambda_prior * mean((pred - prior)^2) and its per-patch gradient.
template <typename DA, typename DB>
HeatmapLossT<typename DA::Scalar> question_loss(const Eigen::ArrayBase<DA>& pred,
                                                const Eigen::ArrayBase<DB>& prior,
                                                double lambda_prior) {
  using Scalar = typename DA::Scalar;
  require(pred.rows() == prior.rows() && pred.cols() == prior.cols(),
          "predicted heatmap and prior differ in shape");
  require(pred.size() > 0, "empty heatmap");
  const Grid<Scalar> diff = pred - prior.template cast<Scalar>();
  const Scalar n = static_cast<Scalar>(diff.size());
  const Scalar lam = static_cast<Scalar>(lambda_prior);
  return {lam * diff.square().sum() / n, Scalar(2) * lam * diff / n};
}

/// L_Q + (lambda_giou L_giou + lambda_centre L_centre + lambda_area L_area)
/// + lambda_dec CE. `lq` is already weighted by lambda_prior.
inline double total_objective(double lq, double giou, double centre, double area, double dec_ce,
                              const LossWeights& w) {
  for (double v : {lq, giou, centre, area, dec_ce, w.lambda_giou, w.lambda_centre,
                   w.lambda_area, w.lambda_prior, w.lambda_dec})
    require(std::isfinite(v), "non-finite loss component or weight");
  for (double v : {lq, giou, centre, area, dec_ce})
    require(v >= 0, "negative loss component");
  for (double v : {w.lambda_giou, w.lambda_centre, w.lambda_area, w.lambda_prior, w.lambda_dec})
    require(v >= 0, "negative loss weight");
  return lq + (w.lambda_giou * giou + w.lambda_centre * centre + w.lambda_area * area) +
         w.lambda_dec * dec_ce;
}

}  // namespace coex
