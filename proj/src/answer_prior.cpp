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

#include "coex/answer_prior.hpp"

#include "coex/textnorm.hpp"

namespace coex {
namespace {

constexpr std::array<std::string_view, 7> kReasonNames = {
    "exact_norm", "exact_digits", "substring_norm", "substring_digits",
    "fuzzy_norm", "fuzzy_digits", "none"};

struct PreparedLine {
  std::string norm;
  std::string digits;
};

MatchResult hit(const OcrDocument& doc, std::size_t i, MatchReason reason,
                std::optional<double> score) {
  MatchResult r;
  r.box = doc.lines[i].box;
  r.reason = reason;
  r.engine = doc.engine;
  r.score = score;
  r.line_index = i;
  return r;
}

}  // namespace

std::string_view to_string(MatchReason r) { return kReasonNames[static_cast<std::size_t>(r)]; }

std::string_view to_string(OcrEngine e) {
  return e == OcrEngine::kPrimary ? "primary" : "fallback";
}

MatchReason parse_reason(std::string_view s) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i)
    if (kReasonNames[i] == s) return static_cast<MatchReason>(i);
  throw Error("unknown match reason: " + std::string(s));
}

OcrEngine parse_engine(std::string_view s) {
  if (s == "primary") return OcrEngine::kPrimary;
  if (s == "fallback") return OcrEngine::kFallback;
  throw Error("unknown OCR engine: " + std::string(s));
}

MatchResult match_answer(std::string_view answer, const OcrDocument& doc,
                         const MatchThresholds& t) {
  require(!answer.empty(), "answer is empty");
  require(t.tau_text > 0.0 && t.tau_text <= 1.0, "tau_text must lie in (0, 1]");
  require(t.tau_dig > 0.0 && t.tau_dig <= 1.0, "tau_dig must lie in (0, 1]");

  const std::string a_norm = text::norm(answer);
  const std::string a_dig = text::dig(answer);
  const bool use_norm = !a_norm.empty();
  const bool use_dig = !a_dig.empty();

  std::vector<PreparedLine> lines;
  lines.reserve(doc.lines.size());
  for (const auto& l : doc.lines) lines.push_back({text::norm(l.text), text::dig(l.text)});
  const std::size_t n = lines.size();

  if (use_norm)
    for (std::size_t i = 0; i < n; ++i)
      if (lines[i].norm == a_norm) return hit(doc, i, MatchReason::kExactNorm, 1.0);
  if (use_dig)
    for (std::size_t i = 0; i < n; ++i)
      if (lines[i].digits == a_dig) return hit(doc, i, MatchReason::kExactDigits, 1.0);
  if (use_norm)
    for (std::size_t i = 0; i < n; ++i)
      if (lines[i].norm.find(a_norm) != std::string::npos)
        return hit(doc, i, MatchReason::kSubstringNorm, std::nullopt);
  if (use_dig)
    for (std::size_t i = 0; i < n; ++i)
      if (lines[i].digits.find(a_dig) != std::string::npos)
        return hit(doc, i, MatchReason::kSubstringDigits, std::nullopt);

  auto best_fuzzy = [&](auto key, const std::string& target, double tau,
                        MatchReason reason) -> std::optional<MatchResult> {
    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = text::lev_sim(target, lines[i].*key);
      if (s >= tau && s > best_score) {
        best = i;
        best_score = s;
      }
    }
    if (!best) return std::nullopt;
    return hit(doc, *best, reason, best_score);
  };

  if (use_norm)
    if (auto r = best_fuzzy(&PreparedLine::norm, a_norm, t.tau_text, MatchReason::kFuzzyNorm))
      return *r;
  if (use_dig)
    if (auto r = best_fuzzy(&PreparedLine::digits, a_dig, t.tau_dig, MatchReason::kFuzzyDigits))
      return *r;
  return {};
}

CornerBox expand_box(const CornerBox& b, double fx, double fy) {
  require(fx >= 0.0 && fy >= 0.0, "expansion factors must be non-negative");
  const double pad_x = b.width() * fx / 2.0;
  const double pad_y = b.height() * fy / 2.0;
  return clip(CornerBox{b.x1 - pad_x, b.y1 - pad_y, b.x2 + pad_x, b.y2 + pad_y});
}

MatchResult generate_prior(std::string_view answer, const OcrDocument& primary,
                           const OcrDocument* fallback, const MatchThresholds& thresholds,
                           const BoxExpansion& expansion) {
  MatchResult r = match_answer(answer, primary, thresholds);
  if (!r.matched() && fallback != nullptr) r = match_answer(answer, *fallback, thresholds);
  if (r.matched()) r.box = expand_box(*r.box, expansion.fx, expansion.fy);
  return r;
}

MatchResult generate_prior(std::span<const std::string> answers, const OcrDocument& primary,
                           const OcrDocument* fallback, const MatchThresholds& thresholds,
                           const BoxExpansion& expansion) {
  require(!answers.empty(), "record has no answers");
  for (const OcrDocument* doc : {&primary, fallback}) {
    if (doc == nullptr) continue;
    for (const auto& a : answers) {
      MatchResult r = match_answer(a, *doc, thresholds);
      if (r.matched()) {
        r.box = expand_box(*r.box, expansion.fx, expansion.fy);
        return r;
      }
    }
  }
  return {};
}

}  // namespace coex
