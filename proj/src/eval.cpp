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

#include "coex/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "coex/reduce.hpp"
#include "coex/textnorm.hpp"

namespace coex {
namespace {

std::optional<double> mean_or_empty(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return pairwise_mean(std::span<const double>(v));
}

GroupStats summarize(const std::vector<const RecordScore*>& rs) {
  std::vector<double> anls, iou, cov, ar;
  for (const RecordScore* r : rs) {
    anls.push_back(r->anls);
    if (r->loc) {
      iou.push_back(r->loc->iou);
      cov.push_back(r->loc->coverage);
      ar.push_back(r->loc->area_ratio);
    }
  }
  GroupStats g;
  g.n = static_cast<int>(rs.size());
  g.n_boxed = static_cast<int>(iou.size());
  g.mean_anls = mean_or_empty(anls);
  g.iou = mean_or_empty(iou);
  g.coverage = mean_or_empty(cov);
  g.area_ratio = mean_or_empty(ar);
  return g;
}

auto sort_key(const RecordScore& r) {
  const double iou = r.loc ? r.loc->iou : -1.0;
  const double cov = r.loc ? r.loc->coverage : -1.0;
  const double ar = r.loc ? r.loc->area_ratio : -1.0;
  return std::tie(r.qid, r.anls, r.acc, iou, cov, ar);
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

std::optional<LocalizationMetrics> localization_metrics(const CornerBox& pred,
                                                        const CornerBox& gt) {
  const double ga = gt.area();
  if (!(ga > 0)) return std::nullopt;
  LocalizationMetrics m;
  const double inter = intersection_area(pred, gt);
  m.iou = inter / union_area(pred, gt);
  m.coverage = inter / ga;
  m.area_ratio = pred.area() / ga;
  return m;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kCorrect: return "correct";
    case Category::kNeutral: return "neutral";
    case Category::kIncorrect: return "incorrect";
  }
  return "incorrect";
}

Category categorize(double anls) {
  if (anls >= 0.75) return Category::kCorrect;
  if (anls >= 0.50) return Category::kNeutral;
  return Category::kIncorrect;
}

RecordScore score_record(const PredictionRecord& r) {
  RecordScore s;
  s.qid = r.qid;
  s.acc = text::acc_score(r.pred_text, r.gt_answers);
  s.anls = text::anls_score(r.pred_text, r.gt_answers);
  s.category = categorize(s.anls);
  if (r.pred_box && r.gt_box) {
    s.loc = localization_metrics(*r.pred_box, *r.gt_box);
    s.degenerate_gt = !s.loc.has_value();
  }
  return s;
}

EvalReport evaluate(const std::vector<PredictionRecord>& records) {
  require(!records.empty(), "no records to evaluate");
  EvalReport rep;
  rep.records.reserve(records.size());
  for (const auto& r : records) rep.records.push_back(score_record(r));
  std::sort(rep.records.begin(), rep.records.end(),
            [](const RecordScore& a, const RecordScore& b) { return sort_key(a) < sort_key(b); });

  std::vector<double> acc;
  for (const auto& r : rep.records) acc.push_back(r.acc);
  std::vector<const RecordScore*> all;
  std::array<std::vector<const RecordScore*>, 3> groups;
  for (const auto& r : rep.records) {
    all.push_back(&r);
    groups[static_cast<std::size_t>(r.category)].push_back(&r);
  }

  rep.n = static_cast<int>(rep.records.size());
  rep.overall = summarize(all);
  rep.acc = pairwise_mean(std::span<const double>(acc));
  rep.anls = *rep.overall.mean_anls;
  rep.iou_m = rep.overall.iou;
  rep.cov_m = rep.overall.coverage;
  rep.ar_m = rep.overall.area_ratio;
  rep.n_boxed = rep.overall.n_boxed;
  rep.skipped = rep.n - rep.n_boxed;
  for (std::size_t i = 0; i < groups.size(); ++i) rep.per_category[i] = summarize(groups[i]);
  return rep;
}

std::string report_markdown(const EvalReport& rep) {
  std::ostringstream os;
  os << "| Group | N | Mean ANLS | IoU | Coverage | AR |\n";
  os << "|---|---:|---:|---:|---:|---:|\n";
  auto row = [&](std::string_view name, const GroupStats& g) {
    os << "| " << name << " | " << g.n << " | " << cell(g.mean_anls) << " | " << cell(g.iou)
       << " | " << cell(g.coverage) << " | " << cell(g.area_ratio) << " |\n";
  };
  row("Correct", rep.per_category[0]);
  row("Neutral", rep.per_category[1]);
  row("Incorrect", rep.per_category[2]);
  row("Overall", rep.overall);
  return os.str();
}

}  // namespace coex
