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

#include <cstddef>
#include <span>

namespace coex {

/// Pairwise (cascade) summation in a fixed split order, so the result
/// depends only on the sequence, never on threading.
template <typename T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T(0);
  if (v.size() <= 8) {
    T acc = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) acc += v[i];
    return acc;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

template <typename T>
T pairwise_mean(std::span<const T> v) {
  return v.empty() ? T(0) : pairwise_sum(v) / static_cast<T>(v.size());
}

}  // namespace coex
