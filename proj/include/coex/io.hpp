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

// File formats: JSON-lines record streams, little-endian binary grids
// (CXHM1 heatmaps, CXSM1 similarity matrices, CXIM1 rasters, CXEM1
// embeddings), PGM/PPM pages and gate parameter JSON.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coex/answer_prior.hpp"
#include "coex/conditioning.hpp"
#include "coex/eval.hpp"
#include "coex/gating.hpp"
#include "coex/heatmap.hpp"

namespace coex::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

/// Error carrying the 1-based line of a JSON-lines input.
class FormatError : public Error {
 public:
  FormatError(const fs::path& file, std::size_t line, const std::string& what)
      : Error(file.string() + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Calls `fn(line_number, object)` for every record line. Blank lines and
/// metadata lines (objects with a "_meta" key) are skipped. Parse and
/// schema errors are rethrown as FormatError naming the line.
void for_each_jsonl(const fs::path& path, const std::function<void(std::size_t, const json&)>& fn);

/// Writes a metadata line followed by one line per record.
void write_jsonl(const fs::path& path, const json& meta, const std::vector<json>& records);

// -- records ----------------------------------------------------------------

struct QaRecord {
  std::string qid;
  std::string doc_id;
  std::string question;
  std::vector<std::string> answers;
};

struct PriorRecord {
  std::string qid;
  std::optional<CornerBox> box;
  MatchReason reason = MatchReason::kNone;
  std::optional<OcrEngine> engine;
  std::optional<double> score;
};

struct PredictionInput {
  std::string qid;
  std::string pred_text;
  std::optional<CornerBox> pred_box;
};

CornerBox box_from_json(const json& j);
json box_to_json(const CornerBox& b);

OcrDocument ocr_from_json(const json& j);
json ocr_to_json(const OcrDocument& d);
QaRecord qa_from_json(const json& j);
json qa_to_json(const QaRecord& r);
PriorRecord prior_from_json(const json& j);
json prior_to_json(const PriorRecord& r);
PredictionInput prediction_from_json(const json& j);

std::vector<OcrDocument> read_ocr(const fs::path& path);
std::vector<QaRecord> read_qa(const fs::path& path);
std::vector<PriorRecord> read_priors(const fs::path& path);
std::vector<PredictionInput> read_predictions(const fs::path& path);

// -- dense binaries -----------------------------------------------------------

void write_heatmap(const fs::path& path, const Heatmap& h);
Heatmap read_heatmap(const fs::path& path);
json heatmap_to_json(const Heatmap& h);
Heatmap heatmap_from_json(const json& j);
/// Reads CXHM1 binary or the JSON form, chosen by the leading bytes.
Heatmap load_heatmap(const fs::path& path);

void write_similarity(const fs::path& path, const SimilarityMatrix& s);
SimilarityMatrix read_similarity(const fs::path& path);

void write_embeddings(const fs::path& path, const EmbeddingGrid<float>& e);
EmbeddingGrid<float> read_embeddings(const fs::path& path);

void write_raster(const fs::path& path, const RasterPage& p);  // CXIM1
RasterPage read_raster(const fs::path& path);
void write_pnm(const fs::path& path, const RasterPage& p);  // P5 or P6, 8-bit
RasterPage read_pnm(const fs::path& path);
/// CXIM1, PGM or PPM by content.
RasterPage load_page(const fs::path& path);
/// Rec. 601 luminance of a 3-channel page, or the single plane.
GrayImage to_gray(const RasterPage& p);

// -- gate parameters ----------------------------------------------------------

json gate_params_to_json(const GateParams& p);
GateParams gate_params_from_json(const json& j);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

// -- reports and metadata -------------------------------------------------------

json report_to_json(const EvalReport& r);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const json& config);

/// Metadata object embedded in (or written beside) every output: tool
/// version, command, config hash and the fixed method selections.
json make_metadata(const std::string& command, const json& config);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

}  // namespace coex::io
