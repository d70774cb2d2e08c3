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

// Central finite-difference verification of the box-loss gradients.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "coex/losses.hpp"

namespace coex {

struct GradSample {
  CentreBox pred;
  CentreBox target;
  std::array<double, 4> analytic{};
  std::array<double, 4> numeric{};
  double rel_error = 0;
};

struct GradSuiteResult {
  std::string loss;
  int samples = 0;
  double max_rel_error = 0;
  GradSample worst;
};

/// max |a - f| / max(max |a|, max |f|, 1e-12) over the four parameters.
inline double relative_error(const std::array<double, 4>& a, const std::array<double, 4>& f) {
  double diff = 0, scale = 1e-12;
  for (int i = 0; i < 4; ++i) {
    diff = std::max(diff, std::abs(a[i] - f[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(f[i])});
  }
  return diff / scale;
}

inline std::array<double, 4> as_array(const BoxGrad& g) { return {g.d_cx, g.d_cy, g.d_w, g.d_h}; }

inline double& param(CentreBox& b, int i) {
  switch (i) {
    case 0: return b.cx;
    case 1: return b.cy;
    case 2: return b.w;
    default: return b.h;
  }
}

using BoxLossFn = std::function<BoxLoss(const CentreBox&, const CentreBox&)>;

/// Central differences of `fn` in each centre-form parameter of `pred`.
inline std::array<double, 4> central_difference(const BoxLossFn& fn, const CentreBox& pred,
                                                const CentreBox& target, double h = 1e-5) {
  std::array<double, 4> g{};
  for (int i = 0; i < 4; ++i) {
    CentreBox hi = pred, lo = pred;
    param(hi, i) += h;
    param(lo, i) -= h;
    g[i] = (fn(hi, target).value - fn(lo, target).value) / (2 * h);
  }
  return g;
}

/// Random pair away from every kink of the GIoU loss: no two compared edges
/// and no overlap extent within `margin`, all sizes at least 0.05.
inline std::pair<CentreBox, CentreBox> random_smooth_pair(std::mt19937_64& rng,
                                                          double margin = 1e-3) {
  std::uniform_real_distribution<double> pos(0.15, 0.85), size(0.05, 0.4);
  for (;;) {
    const CentreBox p{pos(rng), pos(rng), size(rng), size(rng)};
    const CentreBox t{pos(rng), pos(rng), size(rng), size(rng)};
    const auto a = to_corner_unclipped(p), b = to_corner_unclipped(t);
    const std::array<double, 8> gaps = {a.x1 - b.x1, a.x2 - b.x2, a.y1 - b.y1, a.y2 - b.y2,
                                        a.x2 - b.x1, b.x2 - a.x1, a.y2 - b.y1, b.y2 - a.y1};
    bool ok = true;
    for (double g : gaps) ok = ok && std::abs(g) > margin;
    if (ok) return {p, t};
  }
}

/// Runs `samples` random pairs through the central-difference check.
/// `tamper` lets a harness self-test corrupt the analytic gradient.
inline GradSuiteResult check_gradients(const std::string& name, const BoxLossFn& fn, int samples,
                                       std::uint64_t seed,
                                       const std::function<void(BoxGrad&)>& tamper = {}) {
  std::mt19937_64 rng(seed);
  GradSuiteResult res;
  res.loss = name;
  res.samples = samples;
  for (int s = 0; s < samples; ++s) {
    auto [p, t] = random_smooth_pair(rng);
    BoxGrad g = fn(p, t).grad;
    if (tamper) tamper(g);
    GradSample smp{p, t, as_array(g), central_difference(fn, p, t), 0};
    smp.rel_error = relative_error(smp.analytic, smp.numeric);
    if (s == 0 || smp.rel_error > res.max_rel_error) {
      res.max_rel_error = smp.rel_error;
      res.worst = smp;
    }
  }
  return res;
}

}  // namespace coex
