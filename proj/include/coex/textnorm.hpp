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

// String transforms and similarities for OCR matching and ANLS/ACC scoring.
// All strings are UTF-8. Lengths and edit distances count Unicode code
// points, not bytes.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coex::text {

/// NFKC, lowercase, every non-alphanumeric code point replaced by a space,
/// runs of spaces collapsed, trimmed.
std::string norm(std::string_view s);

/// ASCII decimal digits of `s`, in order.
std::string dig(std::string_view s);

struct NormalizedText {
  std::string original;
  std::string normalized;
  std::string digits;
};

NormalizedText normalize(std::string_view s);

/// Plain Levenshtein distance over code points (unit insert/delete/substitute).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - d_lev(a, b) / max(|a|, |b|, 1).
double lev_sim(std::string_view a, std::string_view b);

/// Lowercase and strip surrounding whitespace; the answer normalization used
/// by ANLS and ACC.
std::string answer_key(std::string_view s);

/// Max over answers of the normalized Levenshtein similarity, with scores
/// below 0.5 zeroed. Throws on an empty answer list.
double anls_score(std::string_view pred, std::span<const std::string> answers);

/// 1 if the lowercased, trimmed prediction equals any lowercased, trimmed
/// answer. Throws on an empty answer list.
int acc_score(std::string_view pred, std::span<const std::string> answers);

inline constexpr double kAnlsThreshold = 0.5;

}  // namespace coex::text
