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

#include "coex/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <type_traits>

namespace coex {

using nlohmann::json;

namespace {

/// Strict conversion: integers must be JSON integers, reals any JSON number.
template <typename T>
T typed(const json& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw Error("expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw Error("expected an integer");
  } else {
    if (!v.is_number()) throw Error("expected a number");
  }
  return v.get<T>();
}

template <typename T>
std::function<void(RunConfig&, const json&)> setter(T RunConfig::*field) {
  return [field](RunConfig& c, const json& v) { c.*field = typed<T>(v); };
}

template <typename T, typename Sub>
std::function<void(RunConfig&, const json&)> setter(Sub RunConfig::*outer, T Sub::*inner) {
  return [outer, inner](RunConfig& c, const json& v) { (c.*outer).*inner = typed<T>(v); };
}

const std::map<std::string, std::function<void(RunConfig&, const json&)>>& setters() {
  static const std::map<std::string, std::function<void(RunConfig&, const json&)>> table = {
      {"tau_text", setter(&RunConfig::thresholds, &MatchThresholds::tau_text)},
      {"tau_dig", setter(&RunConfig::thresholds, &MatchThresholds::tau_dig)},
      {"expand_x", setter(&RunConfig::expansion, &BoxExpansion::fx)},
      {"expand_y", setter(&RunConfig::expansion, &BoxExpansion::fy)},
      {"k_top", setter(&RunConfig::k_top)},
      {"k_eval", setter(&RunConfig::k_eval)},
      {"sparsity_tau", setter(&RunConfig::sparsity_tau)},
      {"border_frac", setter(&RunConfig::border_frac)},
      {"variance_window", setter(&RunConfig::variance_window)},
      {"patch_budget", setter(&RunConfig::patch_budget)},
      {"mask_fill", setter(&RunConfig::mask_fill)},
      {"lambda_giou", setter(&RunConfig::weights, &LossWeights::lambda_giou)},
      {"lambda_centre", setter(&RunConfig::weights, &LossWeights::lambda_centre)},
      {"lambda_area", setter(&RunConfig::weights, &LossWeights::lambda_area)},
      {"lambda_prior", setter(&RunConfig::weights, &LossWeights::lambda_prior)},
      {"lambda_dec", setter(&RunConfig::weights, &LossWeights::lambda_dec)},
      {"gate_params", setter(&RunConfig::gate_params)},
      {"parallelism", setter(&RunConfig::parallelism)},
      {"seed",
       [](RunConfig& c, const json& v) {
         if (v.is_string()) c.seed = parse_seed(v.get<std::string>());
         else if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))
           c.seed = v.get<std::uint64_t>();
         else throw Error("expected a non-negative integer");
       }},
  };
  return table;
}

void in_unit(double v, bool open_low, const char* name) {
  const bool ok = std::isfinite(v) && (open_low ? v > 0 : v >= 0) && v <= 1;
  require(ok, std::string(name) + (open_low ? " must lie in (0, 1]" : " must lie in [0, 1]"));
}

}  // namespace

std::uint64_t parse_seed(const std::string& text) {
  require(!text.empty() && text.find_first_of("-+ ") == std::string::npos,
          "seed must be a non-negative integer: '" + text + "'");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
  require(errno == 0 && end && *end == '\0', "seed must be a non-negative integer: '" + text + "'");
  return v;
}

void RunConfig::merge(const json& j) {
  require(j.is_object(), "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    require(it != setters().end(), "unknown config key: " + key);
    try {
      it->second(*this, value);
    } catch (const std::exception&) {
      throw Error("config key " + key + " has the wrong type");
    }
  }
}

void RunConfig::validate() const {
  in_unit(thresholds.tau_text, true, "tau_text");
  in_unit(thresholds.tau_dig, true, "tau_dig");
  require(std::isfinite(expansion.fx) && expansion.fx >= 0, "expand_x must be non-negative");
  require(std::isfinite(expansion.fy) && expansion.fy >= 0, "expand_y must be non-negative");
  in_unit(k_top, true, "k_top");
  in_unit(k_eval, true, "k_eval");
  in_unit(sparsity_tau, false, "sparsity_tau");
  require(std::isfinite(border_frac) && border_frac >= 0 && border_frac < 0.5,
          "border_frac must lie in [0, 0.5)");
  require(variance_window >= 1 && variance_window % 2 == 1, "variance_window must be odd and positive");
  require(patch_budget >= 1, "patch_budget must be positive");
  in_unit(mask_fill, false, "mask_fill");
  for (double w : {weights.lambda_giou, weights.lambda_centre, weights.lambda_area,
                   weights.lambda_prior, weights.lambda_dec})
    require(std::isfinite(w) && w >= 0, "loss weights must be non-negative");
  require(parallelism >= 1 && parallelism <= 256, "parallelism must lie in [1, 256]");
}

// parallelism is left out on purpose: outputs must not depend on it.
json RunConfig::to_json() const {
  return {{"tau_text", thresholds.tau_text},
          {"tau_dig", thresholds.tau_dig},
          {"expand_x", expansion.fx},
          {"expand_y", expansion.fy},
          {"k_top", k_top},
          {"k_eval", k_eval},
          {"sparsity_tau", sparsity_tau},
          {"border_frac", border_frac},
          {"variance_window", variance_window},
          {"patch_budget", patch_budget},
          {"mask_fill", mask_fill},
          {"lambda_giou", weights.lambda_giou},
          {"lambda_centre", weights.lambda_centre},
          {"lambda_area", weights.lambda_area},
          {"lambda_prior", weights.lambda_prior},
          {"lambda_dec", weights.lambda_dec},
          {"gate_params", gate_params},
          {"seed", seed}};
}

RunConfig RunConfig::load(const std::optional<std::filesystem::path>& config_file) {
  RunConfig c;
  if (config_file) {
    std::ifstream in(*config_file);
    require(static_cast<bool>(in), "cannot open config file " + config_file->string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(config_file->string() + ": malformed config: " + e.what());
    }
    c.merge(j);
  }
  if (const char* env = std::getenv("CX_SEED"); env && *env) c.seed = parse_seed(env);
  return c;
}

}  // namespace coex
