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

#include "coex/textnorm.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <numeric>

#include "coex/types.hpp"

namespace coex::text {
namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFKC normalizer unavailable");
  return *n;
}

std::u32string code_points(std::string_view s) {
  const icu::UnicodeString u = from_utf8(s);
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

std::size_t levenshtein_cp(const std::u32string& a, const std::u32string& b) {
  if (a.size() < b.size()) return levenshtein_cp(b, a);
  // Two-row DP over the shorter string.
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double sim_cp(const std::u32string& a, const std::u32string& b) {
  const double denom = static_cast<double>(std::max({a.size(), b.size(), std::size_t{1}}));
  return 1.0 - static_cast<double>(levenshtein_cp(a, b)) / denom;
}

void require_answers(std::span<const std::string> answers) {
  require(!answers.empty(), "answer list is empty");
}

}  // namespace

std::string norm(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = nfkc().normalize(from_utf8(s), status);
  if (U_FAILURE(status)) throw Error("NFKC normalization failed");
  u.toLower(icu::Locale::getRoot());

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (u_isalnum(c)) {
      if (pending_space && !out.isEmpty()) out.append(static_cast<UChar>(u' '));
      pending_space = false;
      out.append(c);
    } else {
      pending_space = true;
    }
  }
  return to_utf8(out);
}

std::string dig(std::string_view s) {
  std::string out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out),
               [](char c) { return c >= '0' && c <= '9'; });
  return out;
}

NormalizedText normalize(std::string_view s) {
  return {std::string(s), norm(s), dig(s)};
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein_cp(code_points(a), code_points(b));
}

double lev_sim(std::string_view a, std::string_view b) {
  return sim_cp(code_points(a), code_points(b));
}

std::string answer_key(std::string_view s) {
  icu::UnicodeString u = from_utf8(s);
  u.toLower(icu::Locale::getRoot());
  u.trim();
  return to_utf8(u);
}

double anls_score(std::string_view pred, std::span<const std::string> answers) {
  require_answers(answers);
  const std::u32string p = code_points(answer_key(pred));
  double best = 0.0;
  for (const auto& a : answers) {
    const double s = sim_cp(p, code_points(answer_key(a)));
    if (s >= kAnlsThreshold) best = std::max(best, s);
  }
  return best;
}

int acc_score(std::string_view pred, std::span<const std::string> answers) {
  require_answers(answers);
  const std::string p = answer_key(pred);
  return std::any_of(answers.begin(), answers.end(),
                     [&](const std::string& a) { return answer_key(a) == p; })
             ? 1
             : 0;
}

}  // namespace coex::text
