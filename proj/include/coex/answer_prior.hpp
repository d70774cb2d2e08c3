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

// Answer-location priors: match a ground-truth answer string to an OCR line
// and turn the line's box into a padded prior box.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coex/geometry.hpp"

namespace coex {

enum class OcrEngine { kPrimary, kFallback };

struct OcrLine {
  std::string text;
  CornerBox box;
};

struct OcrDocument {
  std::string doc_id;
  int width_px = 0;
  int height_px = 0;
  OcrEngine engine = OcrEngine::kPrimary;
  std::vector<OcrLine> lines;  // engine order
};

/// Match rules in priority order. kNone means no rule fired.
enum class MatchReason {
  kExactNorm,
  kExactDigits,
  kSubstringNorm,
  kSubstringDigits,
  kFuzzyNorm,
  kFuzzyDigits,
  kNone,
};

inline constexpr std::array<MatchReason, 7> kAllReasons = {
    MatchReason::kExactNorm,       MatchReason::kExactDigits, MatchReason::kSubstringNorm,
    MatchReason::kSubstringDigits, MatchReason::kFuzzyNorm,   MatchReason::kFuzzyDigits,
    MatchReason::kNone};

struct MatchResult {
  std::optional<CornerBox> box;  // empty iff reason == kNone
  MatchReason reason = MatchReason::kNone;
  std::optional<OcrEngine> engine;
  std::optional<double> score;  // 1 for exact rules, similarity for fuzzy ones
  std::optional<std::size_t> line_index;

  bool matched() const { return reason != MatchReason::kNone; }
};

struct MatchThresholds {
  double tau_text = 0.82;
  double tau_dig = 0.95;
};

struct BoxExpansion {
  double fx = 0.10;
  double fy = 0.15;
};

std::string_view to_string(MatchReason r);
std::string_view to_string(OcrEngine e);
MatchReason parse_reason(std::string_view s);
OcrEngine parse_engine(std::string_view s);

/// Runs the six match rules in priority order over `doc.lines`. Exact and
/// substring rules take the first line in document order; fuzzy rules take
/// the highest-scoring line at or above threshold (earliest on ties). Digit
/// rules are skipped when the answer has no digits. The returned box is the
/// raw line box. Throws on an empty answer or thresholds outside (0, 1].
MatchResult match_answer(std::string_view answer, const OcrDocument& doc,
                         const MatchThresholds& thresholds = {});

/// Grows the box symmetrically about its centre by (1+fx) in width and
/// (1+fy) in height, then clips to the page.
CornerBox expand_box(const CornerBox& b, double fx = 0.10, double fy = 0.15);

/// Full prior: match on the primary document, retry on the fallback when the
/// primary finds nothing, expand the selected line box.
MatchResult generate_prior(std::string_view answer, const OcrDocument& primary,
                           const OcrDocument* fallback, const MatchThresholds& thresholds = {},
                           const BoxExpansion& expansion = {});

/// Prior for a record with several accepted answers: each answer in order on
/// the primary document, then each answer in order on the fallback. The
/// first match wins. Throws when `answers` is empty.
MatchResult generate_prior(std::span<const std::string> answers, const OcrDocument& primary,
                           const OcrDocument* fallback, const MatchThresholds& thresholds = {},
                           const BoxExpansion& expansion = {});

}  // namespace coex
