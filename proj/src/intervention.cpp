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

#include "coex/intervention.hpp"

namespace coex {

std::string_view to_string(InterventionRegion r) {
  return r == InterventionRegion::kOverlap ? "overlap" : "non_overlap";
}

InterventionRegion parse_region(std::string_view s) {
  if (s == "overlap") return InterventionRegion::kOverlap;
  if (s == "non_overlap" || s == "non-overlap") return InterventionRegion::kNonOverlap;
  throw Error("unknown intervention region: " + std::string(s));
}

void InterventionSpec::validate() const {
  require(probability >= 0.0 && probability <= 1.0, "masking probability must lie in [0, 1]");
  require(k > 0.0 && k <= 1.0, "top-k fraction must lie in (0, 1]");
}

std::uint64_t KeyedUniform::fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t KeyedUniform::splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

KeyedUniform::KeyedUniform(std::uint64_t seed, std::string_view record_id)
    : key_(splitmix64(splitmix64(seed) ^ fnv1a(record_id))) {}

double KeyedUniform::operator()(std::uint64_t index) const {
  const std::uint64_t bits = splitmix64(key_ + index * 0x9e3779b97f4a7c15ULL);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

MaskGrid overlap_set(const Heatmap& pred, const Heatmap& prior, double k) {
  require(pred.rows() == prior.rows() && pred.cols() == prior.cols(),
          "predicted heatmap and prior differ in shape");
  return topk_binarize(pred, k) && topk_binarize(prior, k);
}

InterventionResult apply_intervention(const Heatmap& pred, const Heatmap& prior,
                                      const EmbeddingGrid<float>* embeddings,
                                      const InterventionSpec& spec, std::string_view qid) {
  spec.validate();
  if (embeddings) {
    require(embeddings->rows() == pred.size(), "embedding rows differ from the patch count");
  }
  MaskGrid candidates = overlap_set(pred, prior, spec.k);
  if (spec.region == InterventionRegion::kNonOverlap) candidates = !candidates;

  InterventionResult out;
  out.heatmap = pred;
  out.n_candidates = static_cast<int>(candidates.count());
  const KeyedUniform draw(spec.rng_seed, qid);
  const auto cand = candidates.reshaped<Eigen::RowMajor>();
  auto hm = out.heatmap.reshaped<Eigen::RowMajor>();
  for (Eigen::Index i = 0; i < cand.size(); ++i) {
    if (!cand(i)) continue;
    if (draw(static_cast<std::uint64_t>(i)) < spec.probability) {
      hm(i) = 0.0;
      out.selected.push_back(static_cast<int>(i));
    }
  }
  if (embeddings) {
    out.embeddings = *embeddings;
    if (spec.mask_embeddings)
      for (int i : out.selected) out.embeddings->row(i).setZero();
  }
  return out;
}

}  // namespace coex
