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

#include "coex/textnorm.hpp"

using namespace coex::text;
using doctest::Approx;

TEST_CASE("norm folds case and punctuation") {
  CHECK(norm("Vanderbilt University") == "vanderbilt university");
  CHECK(norm("Total: 1,234.00") == "total 1 234 00");
  CHECK(norm("") == "");
  CHECK(norm("  --Hello,   World!!  ") == "hello world");
}

TEST_CASE("norm applies compatibility normalization") {
  CHECK(norm("\xEF\xAC\x81nance") == "finance");            // U+FB01 ligature
  CHECK(norm("\xEF\xBC\xA1\xEF\xBC\xA2\xEF\xBC\xA3") == "abc");  // fullwidth ABC
  CHECK(norm("Stra\xC3\x9F" "e") == "stra\xC3\x9F" "e");     // alphanumeric kept
  CHECK(norm("\xE2\x91\xA0") == "1");                        // circled one
}

TEST_CASE("norm output uses only lowercase alphanumerics and single spaces") {
  for (const char* s : {"A--B  c", "x\t\ny", "...", "MiXeD 123 !!"}) {
    const std::string n = norm(s);
    CHECK(n.find("  ") == std::string::npos);
    CHECK((n.empty() || (n.front() != ' ' && n.back() != ' ')));
    for (char c : n) CHECK((c == ' ' || std::islower(static_cast<unsigned char>(c)) ||
                            std::isdigit(static_cast<unsigned char>(c))));
    CHECK(norm(n) == n);
  }
}

TEST_CASE("dig keeps decimal digits in order") {
  CHECK(dig("1,234.00") == "123400");
  CHECK(dig("$1,000.00") == "100000");
  CHECK(dig("abc") == "");
  CHECK(dig(dig("a1b2c3")) == "123");
}

TEST_CASE("lev_sim matches the recursive edit-distance oracle") {
  CHECK(lev_sim("abc", "abc") == 1.0);
  CHECK(lev_sim("kitten", "sitting") == Approx(1.0 - 3.0 / 7.0));
  CHECK(lev_sim("", "") == 1.0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(0, 9), ch(0, 3);
  auto word = [&] {
    std::string s(len(rng), 'a');
    for (char& c : s) c = static_cast<char>('a' + ch(rng));
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    const std::string a = word(), b = word(), c = word();
    const auto d = oracle::edit_distance(oracle::ascii32(a), oracle::ascii32(b));
    CHECK(levenshtein(a, b) == d);
    CHECK(lev_sim(a, b) == lev_sim(b, a));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
  }
}

TEST_CASE("edit distance counts code points, not bytes") {
  CHECK(levenshtein("caf\xC3\xA9", "cafe") == 1);
  CHECK(lev_sim("\xC3\xA9\xC3\xA9", "\xC3\xA9\xC3\xA9") == 1.0);
}

TEST_CASE("anls thresholds, the near-miss pair and exact matches") {
  const std::vector<std::string> answers = {"10,596"};
  CHECK(anls_score("10,646", answers) == Approx(1.0 - 2.0 / 6.0));
  CHECK(anls_score("Chris", std::vector<std::string>{"chris "}) == 1.0);
  // Distance 51 of 100: similarity 0.49 drops to zero.
  const std::string a(100, 'a');
  std::string b = a;
  for (int i = 0; i < 51; ++i) b[i] = 'b';
  CHECK(lev_sim(a, b) == Approx(0.49));
  CHECK(anls_score(b, std::vector<std::string>{a}) == 0.0);
  CHECK(anls_score("x", std::vector<std::string>{"y", "x"}) == 1.0);
  CHECK_THROWS(anls_score("x", std::vector<std::string>{}));
}

TEST_CASE("anls never lands strictly between 0 and 0.5") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(1, 8), ch(0, 2);
  for (int i = 0; i < 2000; ++i) {
    std::string p(len(rng), 'a'), q(len(rng), 'a');
    for (char& c : p) c = static_cast<char>('a' + ch(rng));
    for (char& c : q) c = static_cast<char>('a' + ch(rng));
    const double s = anls_score(p, std::vector<std::string>{q});
    CHECK((s == 0.0 || s >= 0.5));
  }
}

TEST_CASE("acc compares lowercased trimmed strings") {
  CHECK(acc_score("CHRIS", std::vector<std::string>{"Chris"}) == 1);
  CHECK(acc_score(" yes ", std::vector<std::string>{"no", "YES"}) == 1);
  CHECK(acc_score("chrls", std::vector<std::string>{"chris"}) == 0);
  CHECK_THROWS(acc_score("x", std::vector<std::string>{}));
}
