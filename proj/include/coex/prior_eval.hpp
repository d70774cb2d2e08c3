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

// Question-prior quality metrics against a ground-truth answer region.

#include <cmath>
#include <numbers>

#include "coex/heatmap.hpp"

namespace coex {

namespace detail {
template <typename A, typename B>
void require_same_shape(const A& a, const B& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "heatmap and indicator grids differ");
}
}  // namespace detail

/// sum(min(h, g)) / sum(max(h, g)); 0 when both are empty.
template <typename Derived>
double soft_iou(const Eigen::ArrayBase<Derived>& h, const MaskGrid& g) {
  detail::require_same_shape(h, g);
  const Heatmap hd = h.template cast<double>();
  const Heatmap gd = g.cast<double>();
  const double den = hd.max(gd).sum();
  return den > 0 ? hd.min(gd).sum() / den : 0.0;
}

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  int selected = 0;       // |S|
  int positives = 0;      // |G|
  int hits = 0;           // |S n G|
  bool empty_truth = false;
};

/// Precision and recall of the top-k patch set against the indicator.
template <typename Derived>
PrecisionRecall precision_recall_at_k(const Eigen::ArrayBase<Derived>& h, const MaskGrid& g,
                                      double k = 0.30) {
  detail::require_same_shape(h, g);
  const MaskGrid s = topk_binarize(h, k);
  PrecisionRecall pr;
  pr.selected = static_cast<int>(s.count());
  pr.positives = static_cast<int>(g.count());
  pr.hits = static_cast<int>((s && g).count());
  pr.precision = pr.selected > 0 ? static_cast<double>(pr.hits) / pr.selected : 0.0;
  pr.empty_truth = pr.positives == 0;
  pr.recall = pr.empty_truth ? 0.0 : static_cast<double>(pr.hits) / pr.positives;
  return pr;
}

/// Fraction of patches strictly above tau.
template <typename Derived>
double sparsity(const Eigen::ArrayBase<Derived>& h, double tau = 0.01) {
  if (h.size() == 0) return 0.0;
  return static_cast<double>((h.template cast<double>() > tau).count()) /
         static_cast<double>(h.size());
}

/// Jensen-Shannon divergence (natural log) between two distributions over
/// the same support. Inputs are normalized to unit mass first.
template <typename DA, typename DB>
double jensen_shannon(const Eigen::ArrayBase<DA>& p_raw, const Eigen::ArrayBase<DB>& q_raw) {
  const Eigen::ArrayXd p = p_raw.template cast<double>().reshaped();
  const Eigen::ArrayXd q = q_raw.template cast<double>().reshaped();
  require(p.size() == q.size(), "distributions differ in size");
  require((p >= 0).all() && (q >= 0).all(), "distributions must be non-negative");
  const double sp = p.sum(), sq = q.sum();
  require(sp > 0 && sq > 0, "distribution has zero mass");
  double js = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double a = p(i) / sp, b = q(i) / sq, m = 0.5 * (a + b);
    if (a > 0) js += 0.5 * a * std::log(a / m);
    if (b > 0) js += 0.5 * b * std::log(b / m);
  }
  return std::clamp(js, 0.0, std::numbers::ln2);
}

/// JSD between the heatmap as a distribution and the uniform distribution on
/// the indicator's true patches. Throws on zero mass on either side.
template <typename Derived>
double jsd(const Eigen::ArrayBase<Derived>& h, const MaskGrid& g) {
  detail::require_same_shape(h, g);
  require(g.count() > 0, "indicator has no true patches");
  return jensen_shannon(h, g.cast<double>());
}

}  // namespace coex
