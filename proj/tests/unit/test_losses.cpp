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

#include "doctest.h"
#include "oracles.hpp"

#include "coex/losses.hpp"

using namespace coex;
using doctest::Approx;

namespace {

std::vector<double> vec(const CentreBox& b) { return {b.cx, b.cy, b.w, b.h}; }
std::vector<double> vec(const BoxGrad& g) { return {g.d_cx, g.d_cy, g.d_w, g.d_h}; }

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, scale = 1e-12;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

/// Random pair whose GIoU loss is smooth in a 1e-3 neighbourhood.
std::pair<CentreBox, CentreBox> smooth_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 0.9), size(0.02, 0.6);
  for (;;) {
    const CentreBox p{pos(rng), pos(rng), size(rng), size(rng)};
    const CentreBox t{pos(rng), pos(rng), size(rng), size(rng)};
    const double e[8] = {p.cx - p.w / 2, p.cx + p.w / 2, p.cy - p.h / 2, p.cy + p.h / 2,
                         t.cx - t.w / 2, t.cx + t.w / 2, t.cy - t.h / 2, t.cy + t.h / 2};
    bool ok = true;
    for (int i : {0, 1})
      for (int j : {4, 5}) ok = ok && std::abs(e[i] - e[j]) > 1e-3;
    for (int i : {2, 3})
      for (int j : {6, 7}) ok = ok && std::abs(e[i] - e[j]) > 1e-3;
    if (ok) return {p, t};
  }
}

}  // namespace

TEST_CASE("giou loss values") {
  const CentreBox t{0.5, 0.5, 0.4, 0.3};
  const auto same = giou_loss(t, t);
  CHECK(same.value == Approx(0.0).epsilon(1e-15));
  CHECK(same.grad.d_cx == 0.0);
  CHECK(same.grad.d_cy == 0.0);
  const auto apart = giou_loss(CentreBox{0.25, 0.25, 0.5, 0.5}, CentreBox{0.75, 0.75, 0.5, 0.5});
  CHECK(apart.value == Approx(1.5));
  CHECK_THROWS(giou_loss(t, CentreBox{0.5, 0.5, 0.0, 0.2}));
  CHECK_THROWS(giou_loss(CentreBox{0.5, 0.5, -0.1, 0.2}, t));
}

TEST_CASE("box-loss gradients match central differences on random pairs") {
  std::mt19937_64 rng(21);
  double worst_giou = 0, worst_centre = 0, worst_area = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [p, t] = smooth_pair(rng);
    const auto tv = vec(t);
    const auto fd_giou = oracle::gradient([&](const std::vector<double>& x) { return oracle::giou_loss(x, tv); }, vec(p));
    const auto fd_centre = oracle::gradient(
        [&](const std::vector<double>& x) { return std::hypot(x[0] - tv[0], x[1] - tv[1]); }, vec(p));
    const auto fd_area = oracle::gradient(
        [&](const std::vector<double>& x) {
          const double r = std::sqrt(x[2] * x[3] / (tv[2] * tv[3]));
          return (r - 1) * (r - 1);
        },
        vec(p));
    CHECK(giou_loss(p, t).value == Approx(oracle::giou_loss(vec(p), tv)).epsilon(1e-12));
    worst_giou = std::max(worst_giou, rel_error(vec(giou_loss(p, t).grad), fd_giou));
    worst_centre = std::max(worst_centre, rel_error(vec(centre_loss(p, t).grad), fd_centre));
    worst_area = std::max(worst_area, rel_error(vec(area_loss(p, t).grad), fd_area));
  }
  CHECK(worst_giou <= 1e-4);
  CHECK(worst_centre <= 1e-4);
  CHECK(worst_area <= 1e-4);
}

TEST_CASE("giou gradient at aligned edges is the mean of one-sided slopes") {
  // Pred and target share the left edge and overlap; x1 sits on a kink.
  const CentreBox t{0.5, 0.5, 0.4, 0.4};
  const CornerBox tc = to_corner_unclipped(t);
  const CornerBox pc{tc.x1, 0.35, 0.55, 0.6};
  const auto g = giou_loss_corners(pc, tc);
  auto loss_x1 = [&](double x1) {
    CornerBox q = pc;
    q.x1 = x1;
    return giou_loss_corners(q, tc).value;
  };
  const double h = 1e-6;
  const double right = (loss_x1(pc.x1 + h) - loss_x1(pc.x1)) / h;
  const double left = (loss_x1(pc.x1) - loss_x1(pc.x1 - h)) / h;
  CHECK(right != Approx(left).epsilon(1e-3));
  CHECK(g.grad.d_x1 == Approx((left + right) / 2).epsilon(1e-4));
  // At pred = target every kink is active and the centre slope vanishes.
  const auto at_target = giou_loss(t, t);
  CHECK(at_target.grad.d_cx == 0.0);
  CHECK(at_target.grad.d_cy == 0.0);
}

TEST_CASE("centre loss") {
  const auto l = centre_loss(CentreBox{0.5, 0.5, 0.1, 0.1}, CentreBox{0.5, 0.9, 0.3, 0.3});
  CHECK(l.value == Approx(0.4));
  CHECK(l.grad.d_cx == 0.0);
  CHECK(l.grad.d_cy == Approx(-1.0));
  CHECK(l.grad.d_w == 0.0);
  const auto z = centre_loss(CentreBox{0.2, 0.3, 0.1, 0.1}, CentreBox{0.2, 0.3, 0.5, 0.5});
  CHECK(z.value == 0.0);
  CHECK(z.grad.d_cx == 0.0);
  CHECK(z.grad.d_cy == 0.0);
}

TEST_CASE("area loss values, collapse and scale invariance") {
  const CentreBox t{0.5, 0.5, 0.2, 0.3};
  CHECK(area_loss(CentreBox{0.1, 0.1, 0.3, 0.2}, t).value == Approx(0.0).epsilon(1e-15));
  CHECK(area_loss(CentreBox{0.5, 0.5, 0.4, 0.6}, t).value == Approx(1.0));
  const auto collapsed = area_loss(CentreBox{0.5, 0.5, 0.0, 0.0}, t);
  CHECK(collapsed.value == 1.0);
  CHECK(std::isfinite(collapsed.grad.d_w));
  CHECK(std::isfinite(collapsed.grad.d_h));
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> s(0.05, 0.5), k(0.2, 1.8);
  for (int i = 0; i < 100; ++i) {
    const CentreBox p{0.5, 0.5, s(rng), s(rng)}, q{0.5, 0.5, s(rng), s(rng)};
    const double f = k(rng);
    const CentreBox ps{p.cx, p.cy, p.w * f, p.h * f}, qs{q.cx, q.cy, q.w * f, q.h * f};
    CHECK(area_loss(ps, qs).value == Approx(area_loss(p, q).value).epsilon(1e-10));
  }
}

TEST_CASE("box losses are non-negative and vanish at the target") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto [p, t] = smooth_pair(rng);
    CHECK(giou_loss(p, t).value >= 0.0);
    CHECK(giou_loss(p, t).value <= 2.0);
    CHECK(centre_loss(p, t).value >= 0.0);
    CHECK(area_loss(p, t).value >= 0.0);
    CHECK(giou_loss(t, t).value == Approx(0.0).epsilon(1e-12));
    CHECK(area_loss(t, t).value == Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("question loss") {
  const Heatmap a = Heatmap::Ones(3, 4), z = Heatmap::Zero(3, 4);
  CHECK(question_loss(a, a, 1.0).value == 0.0);
  const auto l = question_loss(a, z, 1.0);
  CHECK(l.value == 1.0);
  CHECK((l.grad - 2.0 / 12.0).abs().maxCoeff() < 1e-15);
  CHECK(question_loss(a, z, 0.0).value == 0.0);
  CHECK_THROWS(question_loss(a, Heatmap::Zero(4, 3), 1.0));
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0, 1);
  Heatmap p(2, 3), q(2, 3);
  for (int i = 0; i < 6; ++i) p.data()[i] = u(rng), q.data()[i] = u(rng);
  const auto g = question_loss(p, q, 0.5).grad;
  for (int i = 0; i < 6; ++i) {
    Heatmap up = p, down = p;
    up.data()[i] += 1e-6;
    down.data()[i] -= 1e-6;
    const double fd = (question_loss(up, q, 0.5).value - question_loss(down, q, 0.5).value) / 2e-6;
    CHECK(g.data()[i] == Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("total objective with the crop-variant weights") {
  const LossWeights w;
  CHECK(total_objective(0, 0, 0, 0, 0, w) == 0.0);
  CHECK(total_objective(0.5, 1, 1, 1, 1, w) == Approx(5.27));
  LossWeights warm = w;
  warm.lambda_dec = 0;
  CHECK(total_objective(0.5, 1, 1, 1, 100, warm) == Approx(5.02));
  CHECK_THROWS(total_objective(std::nan(""), 0, 0, 0, 0, w));
  CHECK_THROWS(total_objective(0, -1, 0, 0, 0, w));
  // Linear in each component.
  const double base = total_objective(0.1, 0.2, 0.3, 0.4, 0.5, w);
  CHECK(total_objective(0.1, 1.2, 0.3, 0.4, 0.5, w) - base == Approx(w.lambda_giou));
  CHECK(total_objective(0.1, 0.2, 1.3, 0.4, 0.5, w) - base == Approx(w.lambda_centre));
  CHECK(total_objective(0.1, 0.2, 0.3, 1.4, 0.5, w) - base == Approx(w.lambda_area));
  CHECK(total_objective(0.1, 0.2, 0.3, 0.4, 1.5, w) - base == Approx(w.lambda_dec));
}
