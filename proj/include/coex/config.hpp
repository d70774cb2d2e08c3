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

// Run configuration shared by the CLI commands. Values resolve as
// command-line flags over CX_SEED (seed only) over a JSON config file over
// built-in defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "coex/answer_prior.hpp"
#include "coex/losses.hpp"

namespace coex {

struct RunConfig {
  MatchThresholds thresholds;     // tau_text, tau_dig
  BoxExpansion expansion;         // expand_x, expand_y
  double k_top = 0.70;            // intervention top-k fraction
  double k_eval = 0.30;           // P@K / R@K fraction
  double sparsity_tau = 0.01;
  double border_frac = 0.07;
  int variance_window = 15;
  int patch_budget = 512;
  float mask_fill = 1.0f;         // mask re-encoding background
  LossWeights weights;
  std::string gate_params;        // optional path
  std::uint64_t seed = 0;
  int parallelism = 1;

  /// Overlays the keys of `j`. Unknown keys and wrong types throw.
  void merge(const nlohmann::json& j);
  /// Throws when any value leaves its documented range.
  void validate() const;
  nlohmann::json to_json() const;

  /// Defaults, then `config_file` when given, then CX_SEED when set.
  /// Flags are applied by the caller afterwards.
  static RunConfig load(const std::optional<std::filesystem::path>& config_file);
};

/// Parses a decimal or 0x-prefixed seed; throws on junk or overflow.
std::uint64_t parse_seed(const std::string& text);

}  // namespace coex
