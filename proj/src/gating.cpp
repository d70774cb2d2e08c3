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

#include "coex/gating.hpp"

#include <string>

namespace coex {

std::string_view to_string(GateVariant v) {
  switch (v) {
    case GateVariant::kLinear: return "linear";
    case GateVariant::kResidual: return "residual";
    case GateVariant::kSpatialAttention: return "spatial_attention";
    case GateVariant::kFilm: return "film";
  }
  return "film";
}

GateVariant parse_gate_variant(std::string_view s) {
  if (s == "linear") return GateVariant::kLinear;
  if (s == "residual") return GateVariant::kResidual;
  if (s == "spatial_attention" || s == "spatial-attention") return GateVariant::kSpatialAttention;
  if (s == "film") return GateVariant::kFilm;
  throw Error("unknown gate variant: " + std::string(s));
}

namespace {

void check_mlp(const Mlp& m, int in, int out, const char* name) {
  const std::string n(name);
  require(m.consistent(), n + ": inconsistent MLP shapes");
  require(m.hidden_dim() >= 1, n + ": hidden width must be positive");
  require(m.in_dim() == in && m.out_dim() == out, n + ": MLP input/output width mismatch");
  require(m.w1.allFinite() && m.b1.allFinite() && m.w2.allFinite() && m.b2.allFinite(),
          n + ": non-finite weights");
}

}  // namespace

void GateParams::validate() const {
  require(dim >= 1, "embedding width must be positive");
  require(std::isfinite(alpha), "gate alpha must be finite");
  require(std::isfinite(epsilon) && epsilon > 0.0, "gate epsilon must be positive");
  if (variant == GateVariant::kResidual) check_mlp(transform, dim, dim, "residual transform");
  if (variant == GateVariant::kFilm) {
    check_mlp(film_gamma, 1, dim, "film gamma");
    check_mlp(film_beta, 1, dim, "film beta");
  }
}

}  // namespace coex
