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

#include "coex/io.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "coex/intervention.hpp"

namespace coex::io {
namespace {

constexpr std::string_view kHeatmapMagic = "CXHM1";
constexpr std::string_view kSimilarityMagic = "CXSM1";
constexpr std::string_view kRasterMagic = "CXIM1";
constexpr std::string_view kEmbeddingMagic = "CXEM1";

// -- little-endian byte packing --------------------------------------------

class ByteWriter {
 public:
  void magic(std::string_view m) { out_.append(m); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string bytes, fs::path path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void magic(std::string_view m) {
    need(m.size());
    if (std::string_view(bytes_).substr(pos_, m.size()) != m)
      throw Error(path_.string() + ": bad magic, expected " + std::string(m));
    pos_ += m.size();
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void finish() const {
    if (pos_ != bytes_.size()) throw Error(path_.string() + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(path_.string() + ": truncated file");
  }
  std::string bytes_;
  fs::path path_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_dim(std::uint32_t v, const fs::path& p, const char* what) {
  if (v == 0 || v > (1u << 28)) throw Error(p.string() + ": invalid " + what);
  return v;
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("field \"") + key + "\" has the wrong type");
  }
}

bool starts_with(const std::string& bytes, std::string_view prefix) {
  return bytes.size() >= prefix.size() && std::string_view(bytes).substr(0, prefix.size()) == prefix;
}

// -- PNM ------------------------------------------------------------------------

std::string pnm_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

}  // namespace

// -- JSON lines -----------------------------------------------------------------

void for_each_jsonl(const fs::path& path,
                    const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path, n, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError(path, n, "record is not a JSON object");
    if (j.contains("_meta")) continue;
    try {
      fn(n, j);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(path, n, e.what());
    }
  }
}

void write_jsonl(const fs::path& path, const json& meta, const std::vector<json>& records) {
  std::ostringstream os;
  os << json{{"_meta", meta}}.dump() << '\n';
  for (const auto& r : records) os << r.dump() << '\n';
  write_file(path, os.str());
}

// -- records ------------------------------------------------------------------------

CornerBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error("box must be an array of 4 numbers");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw Error("box must be an array of 4 numbers");
    v[i] = j[i].get<double>();
  }
  return checked_box(v[0], v[1], v[2], v[3]);
}

json box_to_json(const CornerBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

OcrDocument ocr_from_json(const json& j) {
  OcrDocument d;
  d.doc_id = get_field<std::string>(j, "doc_id");
  d.width_px = get_field<int>(j, "width_px");
  d.height_px = get_field<int>(j, "height_px");
  require(d.width_px > 0 && d.height_px > 0, "page dimensions must be positive");
  d.engine = parse_engine(get_field<std::string>(j, "engine"));
  if (!j.contains("lines") || !j["lines"].is_array()) throw Error("missing array field \"lines\"");
  for (const auto& l : j["lines"]) {
    if (!l.is_object()) throw Error("OCR line is not an object");
    if (!l.contains("box")) throw Error("missing field \"box\"");
    d.lines.push_back({get_field<std::string>(l, "text"), box_from_json(l["box"])});
  }
  return d;
}

json ocr_to_json(const OcrDocument& d) {
  json lines = json::array();
  for (const auto& l : d.lines) lines.push_back({{"text", l.text}, {"box", box_to_json(l.box)}});
  return {{"doc_id", d.doc_id},
          {"width_px", d.width_px},
          {"height_px", d.height_px},
          {"engine", to_string(d.engine)},
          {"lines", lines}};
}

QaRecord qa_from_json(const json& j) {
  QaRecord r;
  r.qid = get_field<std::string>(j, "qid");
  r.doc_id = get_field<std::string>(j, "doc_id");
  r.question = j.contains("question") ? get_field<std::string>(j, "question") : std::string();
  r.answers = get_field<std::vector<std::string>>(j, "answers");
  require(!r.answers.empty(), "answers list is empty");
  return r;
}

json qa_to_json(const QaRecord& r) {
  return {{"qid", r.qid}, {"doc_id", r.doc_id}, {"question", r.question}, {"answers", r.answers}};
}

PriorRecord prior_from_json(const json& j) {
  PriorRecord r;
  r.qid = get_field<std::string>(j, "qid");
  if (j.contains("box") && !j["box"].is_null()) r.box = box_from_json(j["box"]);
  r.reason = parse_reason(get_field<std::string>(j, "reason"));
  if (j.contains("engine") && !j["engine"].is_null())
    r.engine = parse_engine(get_field<std::string>(j, "engine"));
  if (j.contains("score") && !j["score"].is_null()) r.score = get_field<double>(j, "score");
  require((r.reason == MatchReason::kNone) == !r.box.has_value(),
          "prior box must be null exactly when reason is none");
  return r;
}

json prior_to_json(const PriorRecord& r) {
  return {{"qid", r.qid},
          {"box", r.box ? box_to_json(*r.box) : json(nullptr)},
          {"reason", to_string(r.reason)},
          {"engine", r.engine ? json(to_string(*r.engine)) : json(nullptr)},
          {"score", r.score ? json(*r.score) : json(nullptr)}};
}

PredictionInput prediction_from_json(const json& j) {
  PredictionInput p;
  p.qid = get_field<std::string>(j, "qid");
  p.pred_text = get_field<std::string>(j, "pred_text");
  if (j.contains("pred_box") && !j["pred_box"].is_null()) p.pred_box = box_from_json(j["pred_box"]);
  return p;
}

namespace {
template <typename T, typename F>
std::vector<T> read_all(const fs::path& path, F parse) {
  std::vector<T> out;
  for_each_jsonl(path, [&](std::size_t, const json& j) { out.push_back(parse(j)); });
  return out;
}
}  // namespace

std::vector<OcrDocument> read_ocr(const fs::path& p) { return read_all<OcrDocument>(p, ocr_from_json); }
std::vector<QaRecord> read_qa(const fs::path& p) { return read_all<QaRecord>(p, qa_from_json); }
std::vector<PriorRecord> read_priors(const fs::path& p) {
  return read_all<PriorRecord>(p, prior_from_json);
}
std::vector<PredictionInput> read_predictions(const fs::path& p) {
  return read_all<PredictionInput>(p, prediction_from_json);
}

// -- dense binaries ---------------------------------------------------------------

void write_heatmap(const fs::path& path, const Heatmap& h) {
  ByteWriter w;
  w.magic(kHeatmapMagic);
  w.u32(static_cast<std::uint32_t>(h.rows()));
  w.u32(static_cast<std::uint32_t>(h.cols()));
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) w.f32(static_cast<float>(h(r, c)));
  write_file(path, w.take());
}

Heatmap read_heatmap(const fs::path& path) {
  ByteReader rd(read_file(path), path);
  rd.magic(kHeatmapMagic);
  const auto rows = checked_dim(rd.u32(), path, "row count");
  const auto cols = checked_dim(rd.u32(), path, "column count");
  Heatmap h(rows, cols);
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = rd.f32();
  rd.finish();
  return h;
}

json heatmap_to_json(const Heatmap& h) {
  json values = json::array();
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) values.push_back(static_cast<float>(h(r, c)));
  return {{"rows", h.rows()}, {"cols", h.cols()}, {"values", values}};
}

Heatmap heatmap_from_json(const json& j) {
  const int rows = get_field<int>(j, "rows");
  const int cols = get_field<int>(j, "cols");
  require(rows >= 1 && cols >= 1, "heatmap dimensions must be positive");
  const auto values = get_field<std::vector<double>>(j, "values");
  require(values.size() == static_cast<std::size_t>(rows) * cols, "heatmap value count != rows*cols");
  Heatmap h(rows, cols);
  std::copy(values.begin(), values.end(), h.reshaped<Eigen::RowMajor>().begin());
  return h;
}

Heatmap load_heatmap(const fs::path& path) {
  const std::string bytes = read_file(path);
  if (starts_with(bytes, kHeatmapMagic)) return read_heatmap(path);
  try {
    return heatmap_from_json(json::parse(bytes));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": neither CXHM1 nor heatmap JSON: " + e.what());
  }
}

void write_similarity(const fs::path& path, const SimilarityMatrix& s) {
  ByteWriter w;
  w.magic(kSimilarityMagic);
  w.u32(static_cast<std::uint32_t>(s.n_tokens()));
  w.u32(static_cast<std::uint32_t>(s.grid.rows));
  w.u32(static_cast<std::uint32_t>(s.grid.cols));
  for (Eigen::Index t = 0; t < s.scores.rows(); ++t)
    for (Eigen::Index p = 0; p < s.scores.cols(); ++p) w.f32(static_cast<float>(s.scores(t, p)));
  write_file(path, w.take());
}

SimilarityMatrix read_similarity(const fs::path& path) {
  ByteReader rd(read_file(path), path);
  rd.magic(kSimilarityMagic);
  const auto n = checked_dim(rd.u32(), path, "token count");
  SimilarityMatrix s;
  s.grid.rows = static_cast<int>(checked_dim(rd.u32(), path, "row count"));
  s.grid.cols = static_cast<int>(checked_dim(rd.u32(), path, "column count"));
  s.scores.resize(n, s.grid.size());
  for (Eigen::Index t = 0; t < s.scores.rows(); ++t)
    for (Eigen::Index p = 0; p < s.scores.cols(); ++p) {
      s.scores(t, p) = rd.f32();
      if (!std::isfinite(s.scores(t, p))) throw Error(path.string() + ": non-finite similarity");
    }
  rd.finish();
  return s;
}

void write_embeddings(const fs::path& path, const EmbeddingGrid<float>& e) {
  ByteWriter w;
  w.magic(kEmbeddingMagic);
  w.u32(static_cast<std::uint32_t>(e.rows()));
  w.u32(static_cast<std::uint32_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.size(); ++i) w.f32(e.data()[i]);
  write_file(path, w.take());
}

EmbeddingGrid<float> read_embeddings(const fs::path& path) {
  ByteReader rd(read_file(path), path);
  rd.magic(kEmbeddingMagic);
  const auto n = checked_dim(rd.u32(), path, "patch count");
  const auto d = checked_dim(rd.u32(), path, "embedding width");
  EmbeddingGrid<float> e(n, d);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = rd.f32();
  rd.finish();
  return e;
}

void write_raster(const fs::path& path, const RasterPage& p) {
  p.validate();
  ByteWriter w;
  w.magic(kRasterMagic);
  w.u32(static_cast<std::uint32_t>(p.height()));
  w.u32(static_cast<std::uint32_t>(p.width()));
  w.u32(static_cast<std::uint32_t>(p.channels()));
  for (const auto& plane : p.planes)
    for (Eigen::Index i = 0; i < plane.size(); ++i) w.f32(plane.data()[i]);
  write_file(path, w.take());
}

RasterPage read_raster(const fs::path& path) {
  ByteReader rd(read_file(path), path);
  rd.magic(kRasterMagic);
  const auto h = checked_dim(rd.u32(), path, "height");
  const auto w = checked_dim(rd.u32(), path, "width");
  const auto c = checked_dim(rd.u32(), path, "channel count");
  if (c != 1 && c != 3) throw Error(path.string() + ": channel count must be 1 or 3");
  RasterPage p(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  for (auto& plane : p.planes)
    for (Eigen::Index i = 0; i < plane.size(); ++i) plane.data()[i] = rd.f32();
  rd.finish();
  p.validate();
  return p;
}

void write_pnm(const fs::path& path, const RasterPage& p) {
  p.validate();
  std::ostringstream os;
  os << (p.channels() == 1 ? "P5" : "P6") << '\n' << p.width() << ' ' << p.height() << "\n255\n";
  std::string body;
  body.reserve(static_cast<std::size_t>(p.width()) * p.height() * p.channels());
  for (int r = 0; r < p.height(); ++r)
    for (int c = 0; c < p.width(); ++c)
      for (const auto& plane : p.planes) {
        const float v = std::clamp(plane(r, c), 0.0f, 1.0f);
        body.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
      }
  write_file(path, os.str() + body);
}

RasterPage read_pnm(const fs::path& path) {
  const std::string s = read_file(path);
  std::size_t pos = 0;
  const std::string kind = pnm_token(s, pos);
  if (kind != "P5" && kind != "P6") throw Error(path.string() + ": only binary P5/P6 supported");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(s, pos));
    h = std::stoi(pnm_token(s, pos));
    maxval = std::stoi(pnm_token(s, pos));
  } catch (const std::exception&) {
    throw Error(path.string() + ": malformed PNM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(path.string() + ": malformed PNM header");
  ++pos;  // single whitespace before the raster
  const int channels = kind == "P5" ? 1 : 3;
  const int bytes_per = maxval < 256 ? 1 : 2;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels * bytes_per;
  if (s.size() < pos + need) throw Error(path.string() + ": truncated PNM raster");
  RasterPage p(h, w, channels);
  const auto* data = reinterpret_cast<const unsigned char*>(s.data() + pos);
  std::size_t i = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < channels; ++ch) {
        unsigned v = data[i++];
        if (bytes_per == 2) v = (v << 8) | data[i++];
        p.planes[ch](r, c) = static_cast<float>(v) / static_cast<float>(maxval);
      }
  return p;
}

RasterPage load_page(const fs::path& path) {
  const std::string head = read_file(path).substr(0, 5);
  if (head == kRasterMagic) return read_raster(path);
  return read_pnm(path);
}

GrayImage to_gray(const RasterPage& p) {
  p.validate();
  if (p.channels() == 1) return p.planes[0].cast<double>();
  return 0.299 * p.planes[0].cast<double>() + 0.587 * p.planes[1].cast<double>() +
         0.114 * p.planes[2].cast<double>();
}

// -- gate parameters ----------------------------------------------------------------

std::string base64_encode(const std::string& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::string base64_decode(const std::string& text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  if (text.size() % 4 != 0) throw Error("base64 length is not a multiple of 4");
  std::string trimmed = text;
  std::size_t pad = 0;
  while (!trimmed.empty() && trimmed.back() == '=') {
    trimmed.pop_back();
    ++pad;
  }
  if (pad > 2) throw Error("invalid base64 padding");
  try {
    std::string out(It(trimmed.begin()), It(trimmed.end()));
    // The 6->8 transform emits a partial trailing byte for padded input.
    const std::size_t exact = trimmed.size() * 6 / 8;
    out.resize(exact);
    return out;
  } catch (const std::exception&) {
    throw Error("invalid base64 text");
  }
}

namespace {

std::string pack_floats(const float* data, Eigen::Index n) {
  ByteWriter w;
  for (Eigen::Index i = 0; i < n; ++i) w.f32(data[i]);
  return w.take();
}

json blob(const Eigen::MatrixXf& m) {
  // Row-major float32 payload.
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return {{"shape", {m.rows(), m.cols()}}, {"data", base64_encode(pack_floats(rm.data(), rm.size()))}};
}

Eigen::MatrixXf unblob(const json& j) {
  const auto shape = get_field<std::vector<long>>(j, "shape");
  require(shape.size() == 2 && shape[0] >= 0 && shape[1] >= 0, "weight blob shape must be [rows, cols]");
  const std::string bytes = base64_decode(get_field<std::string>(j, "data"));
  require(bytes.size() == static_cast<std::size_t>(shape[0] * shape[1] * 4),
          "weight blob size does not match its shape");
  ByteReader rd(bytes, "weight blob");
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(shape[0], shape[1]);
  for (Eigen::Index i = 0; i < rm.size(); ++i) rm.data()[i] = rd.f32();
  return rm;
}

json mlp_to_json(const Mlp& m) {
  return {{"w1", blob(m.w1)}, {"b1", blob(m.b1)}, {"w2", blob(m.w2)}, {"b2", blob(m.b2)}};
}

Mlp mlp_from_json(const json& j) {
  const Eigen::MatrixXf b1 = unblob(j.at("b1"));
  const Eigen::MatrixXf b2 = unblob(j.at("b2"));
  require(b1.cols() == 1 && b2.cols() == 1, "MLP biases must be column vectors");
  Mlp m;
  m.w1 = unblob(j.at("w1"));
  m.b1 = b1.col(0);
  m.w2 = unblob(j.at("w2"));
  m.b2 = b2.col(0);
  require(m.consistent(), "inconsistent MLP shapes");
  return m;
}

}  // namespace

json gate_params_to_json(const GateParams& p) {
  json j = {{"variant", to_string(p.variant)},
            {"dim", p.dim},
            {"alpha", p.alpha},
            {"epsilon", p.epsilon},
            {"seed", p.seed},
            {"dropout", "omitted (inference)"}};
  if (p.variant == GateVariant::kResidual) {
    j["transform"] = mlp_to_json(p.transform);
    j["hidden"] = p.transform.hidden_dim();
  }
  if (p.variant == GateVariant::kFilm) {
    j["film_gamma"] = mlp_to_json(p.film_gamma);
    j["film_beta"] = mlp_to_json(p.film_beta);
    j["hidden"] = p.film_gamma.hidden_dim();
  }
  return j;
}

GateParams gate_params_from_json(const json& j) {
  GateParams p;
  p.variant = parse_gate_variant(get_field<std::string>(j, "variant"));
  p.dim = get_field<int>(j, "dim");
  if (j.contains("alpha")) p.alpha = get_field<double>(j, "alpha");
  if (j.contains("epsilon")) p.epsilon = get_field<double>(j, "epsilon");
  if (j.contains("seed")) p.seed = get_field<std::uint64_t>(j, "seed");
  try {
    if (p.variant == GateVariant::kResidual) p.transform = mlp_from_json(j.at("transform"));
    if (p.variant == GateVariant::kFilm) {
      p.film_gamma = mlp_from_json(j.at("film_gamma"));
      p.film_beta = mlp_from_json(j.at("film_beta"));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("gate parameters: ") + e.what());
  }
  p.validate();
  return p;
}

// -- reports and metadata -----------------------------------------------------------

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json group_to_json(const GroupStats& g) {
  return {{"n", g.n},           {"n_boxed", g.n_boxed}, {"mean_anls", opt(g.mean_anls)},
          {"iou", opt(g.iou)},  {"coverage", opt(g.coverage)}, {"ar", opt(g.area_ratio)}};
}

}  // namespace

json report_to_json(const EvalReport& r) {
  json per_category = json::object();
  for (Category c : kAllCategories)
    per_category[std::string(to_string(c))] = group_to_json(r.per_category[static_cast<int>(c)]);
  json records = json::array();
  for (const auto& s : r.records) {
    json rec = {{"qid", s.qid},
                {"acc", s.acc},
                {"anls", s.anls},
                {"category", to_string(s.category)},
                {"iou", nullptr},
                {"coverage", nullptr},
                {"ar", nullptr}};
    if (s.loc) {
      rec["iou"] = s.loc->iou;
      rec["coverage"] = s.loc->coverage;
      rec["ar"] = s.loc->area_ratio;
    }
    if (s.degenerate_gt) rec["degenerate_gt"] = true;
    records.push_back(rec);
  }
  return {{"n", r.n},
          {"acc", r.acc},
          {"anls", r.anls},
          {"iou_m", opt(r.iou_m)},
          {"cov_m", opt(r.cov_m)},
          {"ar_m", opt(r.ar_m)},
          {"n_boxed", r.n_boxed},
          {"skipped", r.skipped},
          {"unjoined", r.unjoined},
          {"per_category", per_category},
          {"overall", group_to_json(r.overall)},
          {"records", records}};
}

std::string config_hash(const json& config) {
  const std::uint64_t h = KeyedUniform::fnv1a(config.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json make_metadata(const std::string& command, const json& config) {
  return {{"tool", "coex"},
          {"version", kToolVersion},
          {"command", command},
          {"config_hash", config_hash(config)},
          {"config", config},
          {"decisions",
           {{"mask_fill", "configurable, default 1.0 (white)"},
            {"heatmap_normalization", "per-map min-max"},
            {"variance_weighting", "multiplicative, max-normalized local variance, no floor"},
            {"bicubic_kernel", "Catmull-Rom a=-0.5, clamped sample indices"},
            {"downsample", "area-weighted"},
            {"border_rule", "patch centre within border fraction of an edge"},
            {"token_prune_sigma", "max(box half-extent, one patch)"},
            {"token_prune_threshold", "weight >= ceil(P/2)-th largest"},
            {"jsd_reference", "uniform over ground-truth box patches"},
            {"sparsity", "fraction of patches strictly above tau"},
            {"fuzzy_match", "whole-line, best score, document order on ties"},
            {"box_expansion", "symmetric about the centre, then clipped"},
            {"crop_resize", "bilinear stretch to page size"},
            {"attention_fallback", "nearest patch to the box centre, flagged"},
            {"intervention_rng", "SplitMix64 keyed by seed and record id"}}}};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace coex::io
