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

// Answer-localization metrics, ANLS/ACC aggregation and accuracy-grouped
// analysis.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coex/geometry.hpp"

namespace coex {

struct PredictionRecord {
  std::string qid;
  std::string pred_text;
  std::optional<CornerBox> pred_box;
  std::vector<std::string> gt_answers;
  std::optional<CornerBox> gt_box;
};

struct LocalizationMetrics {
  double iou = 0;
  double coverage = 0;    // |pred n gt| / |gt|
  double area_ratio = 0;  // |pred| / |gt|
};

/// Per-record IoU, coverage and area ratio. Empty when the ground-truth box
/// has zero area.
std::optional<LocalizationMetrics> localization_metrics(const CornerBox& pred, const CornerBox& gt);

enum class Category { kCorrect, kNeutral, kIncorrect };

inline constexpr std::array<Category, 3> kAllCategories = {Category::kCorrect, Category::kNeutral,
                                                            Category::kIncorrect};

std::string_view to_string(Category c);

/// Correct: anls >= 0.75; neutral: 0.50 <= anls < 0.75; incorrect: below.
Category categorize(double anls);

struct RecordScore {
  std::string qid;
  int acc = 0;
  double anls = 0;
  Category category = Category::kIncorrect;
  std::optional<LocalizationMetrics> loc;
  bool degenerate_gt = false;
};

struct GroupStats {
  int n = 0;
  int n_boxed = 0;
  std::optional<double> mean_anls;
  std::optional<double> iou;
  std::optional<double> coverage;
  std::optional<double> area_ratio;
};

struct EvalReport {
  int n = 0;
  double acc = 0;
  double anls = 0;
  std::optional<double> iou_m;
  std::optional<double> cov_m;
  std::optional<double> ar_m;
  int n_boxed = 0;
  int skipped = 0;  // records without a usable box pair
  std::array<GroupStats, 3> per_category;  // indexed by Category
  GroupStats overall;
  std::vector<RecordScore> records;  // sorted by qid
  std::vector<std::string> unjoined; // filled by callers joining files
};

RecordScore score_record(const PredictionRecord& r);

/// Text metrics over all records, box metrics over records with both boxes.
/// Means are macro averages by pairwise summation over qid-sorted records,
/// so the report does not depend on input order. Throws on empty input.
EvalReport evaluate(const std::vector<PredictionRecord>& records);

/// Markdown table with columns Group, N, Mean ANLS, IoU, Coverage, AR.
std::string report_markdown(const EvalReport& report);

}  // namespace coex
