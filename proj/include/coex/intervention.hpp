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

// Faithfulness interventions: zero heatmap patches (and optionally their
// embeddings) that overlap, or avoid, the prior's top-k region.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coex/heatmap.hpp"

namespace coex {

enum class InterventionRegion { kOverlap, kNonOverlap };

std::string_view to_string(InterventionRegion r);
InterventionRegion parse_region(std::string_view s);

struct InterventionSpec {
  InterventionRegion region = InterventionRegion::kOverlap;
  double probability = 1.0;
  bool mask_embeddings = false;
  double k = 0.70;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Counter-based uniform stream keyed by (seed, record id, patch index):
/// SplitMix64 finalizer over a key mixed from a 64-bit FNV-1a hash of the
/// record id. Draws do not depend on evaluation order.
class KeyedUniform {
 public:
  KeyedUniform(std::uint64_t seed, std::string_view record_id);

  /// Uniform in [0, 1) for counter `index`.
  double operator()(std::uint64_t index) const;

  static std::uint64_t fnv1a(std::string_view s);
  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  std::uint64_t key_;
};

/// Patches in the top-k of both maps.
MaskGrid overlap_set(const Heatmap& pred, const Heatmap& prior, double k = 0.70);

struct InterventionResult {
  Heatmap heatmap;
  std::optional<EmbeddingGrid<float>> embeddings;
  std::vector<int> selected;  // row-major patch indices that were zeroed
  int n_candidates = 0;
};

/// Each candidate patch (the overlap set or its complement) is zeroed with
/// probability `spec.probability`, drawing from KeyedUniform(seed, qid) in
/// row-major order. With `mask_embeddings` the same patches' embedding rows
/// are zeroed too.
InterventionResult apply_intervention(const Heatmap& pred, const Heatmap& prior,
                                      const EmbeddingGrid<float>* embeddings,
                                      const InterventionSpec& spec, std::string_view qid);

}  // namespace coex
