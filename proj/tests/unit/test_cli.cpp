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

#include <sstream>

#include "doctest.h"

#include "cli.hpp"
#include "coex/intervention.hpp"
#include "coex/io.hpp"
#include "test_util.hpp"

using namespace coex;
using testutil::TempDir;
using testutil::slurp;
using testutil::spit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run coex_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const TempDir& d, const std::string& name) { return (d / name).string(); }

void write_corpus(const TempDir& d) {
  io::json doc = {{"doc_id", "d1"}, {"width_px", 100}, {"height_px", 100}, {"engine", "primary"},
                  {"lines", {{{"text", "Invoice total 1,234.00"}, {"box", {0.1, 0.1, 0.5, 0.2}}},
                             {{"text", "Paid by Chris"}, {"box", {0.1, 0.3, 0.4, 0.4}}}}}};
  spit(d / "ocr.jsonl", doc.dump() + "\n");
  spit(d / "qa.jsonl",
       R"({"qid":"q1","doc_id":"d1","question":"total?","answers":["1234"]})" "\n"
       R"({"qid":"q2","doc_id":"d1","question":"who?","answers":["chris"]})" "\n"
       R"({"qid":"q3","doc_id":"d9","question":"?","answers":["x"]})" "\n");
}

}  // namespace

TEST_CASE("answer-prior keeps one record per question and prints the histogram") {
  TempDir d;
  write_corpus(d);
  const Run r = coex_run({"answer-prior", "--ocr", p(d, "ocr.jsonl"), "--qa", p(d, "qa.jsonl"),
                          "--out", p(d, "priors.jsonl")});
  CHECK(r.code == 0);
  CHECK(r.out.find("substring_digits") != std::string::npos);
  CHECK(r.err.find("q3") != std::string::npos);
  const auto priors = io::read_priors(d / "priors.jsonl");
  REQUIRE(priors.size() == 3);
  CHECK(priors[0].reason == MatchReason::kSubstringDigits);
  CHECK(priors[1].reason == MatchReason::kSubstringNorm);
  CHECK(priors[2].reason == MatchReason::kNone);
  const std::string text = slurp(d / "priors.jsonl");
  const auto meta = io::json::parse(text.substr(0, text.find('\n')));
  CHECK(meta["_meta"]["config"]["tau_text"] == 0.82);
  CHECK(meta["_meta"]["config"]["tau_dig"] == 0.95);
  CHECK(meta["_meta"]["decisions"].is_object());

  const Run again = coex_run({"answer-prior", "--ocr", p(d, "ocr.jsonl"), "--qa", p(d, "qa.jsonl"),
                              "--out", p(d, "priors2.jsonl"), "--jobs", "4"});
  CHECK(again.code == 0);
  CHECK(slurp(d / "priors2.jsonl") == text);
}

TEST_CASE("malformed input exits 2 and names the line") {
  TempDir d;
  write_corpus(d);
  spit(d / "bad.jsonl", R"({"qid":"q1","doc_id":"d1","answers":["1"]})" "\n{oops\n");
  const Run r = coex_run({"answer-prior", "--ocr", p(d, "ocr.jsonl"), "--qa", p(d, "bad.jsonl"),
                          "--out", p(d, "o.jsonl")});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.jsonl:2:") != std::string::npos);
  CHECK(coex_run({"answer-prior", "--ocr", p(d, "ocr.jsonl")}).code == 2);
  CHECK(coex_run({"frobnicate"}).code == 2);
  CHECK(coex_run({"--version"}).code == 0);
}

TEST_CASE("config files with unknown keys are rejected and CX_SEED is honoured") {
  TempDir d;
  spit(d / "cfg.json", R"({"tau_txt": 0.5})");
  CHECK(coex_run({"gradcheck", "--samples", "5", "--config", p(d, "cfg.json")}).code != 0);
  spit(d / "ok.json", R"({"seed": 3})");
  CHECK(coex_run({"gradcheck", "--samples", "5", "--config", p(d, "ok.json")}).code == 0);
}

TEST_CASE("question-prior writes heatmaps, metrics and deterministic bytes") {
  TempDir d;
  SimilarityMatrix s;
  s.grid = {4, 4};
  s.scores = decltype(s.scores)::Constant(3, 16, 0.6);
  io::write_similarity(d / "sim/doc.cxsm", s);
  io::write_raster(d / "pages/doc.cxim", RasterPage(40, 40, 1, 0.5f));
  spit(d / "gt.jsonl", R"({"doc_id":"doc","box":[0.25,0.25,0.75,0.75]})" "\n");

  const Run raw = coex_run({"question-prior", "--sim", p(d, "sim/doc.cxsm"), "--page",
                            p(d, "pages/doc.cxim"), "--out", p(d, "raw.cxhm"), "--grid", "8x8",
                            "--no-postprocess"});
  REQUIRE(raw.code == 0);
  const Heatmap h = io::read_heatmap(d / "raw.cxhm");
  CHECK(h.rows() == 8);
  CHECK((h - 0.6).abs().maxCoeff() < 1e-6);

  const std::vector<std::string> args = {"question-prior", "--sim", p(d, "sim"), "--page",
                                         p(d, "pages"), "--out", p(d, "out"), "--gt", p(d, "gt.jsonl")};
  REQUIRE(coex_run(args).code == 0);
  const Heatmap post = io::read_heatmap(d / "out/doc.cxhm");
  CHECK(post.minCoeff() >= 0.0);
  CHECK(post.maxCoeff() <= 1.0);
  CHECK(post.row(0).maxCoeff() == 0.0);
  CHECK(post.col(post.cols() - 1).maxCoeff() == 0.0);
  const std::string metrics = slurp(d / "out/metrics.jsonl");
  const auto lines = metrics.find('\n');
  const io::json m = io::json::parse(metrics.substr(lines + 1));
  for (const char* key : {"iou_soft", "p_at_k", "r_at_k", "sparsity", "jsd", "doc_id"})
    CHECK(m.contains(key));
  CHECK(fs::exists(d / "out/meta.json"));

  const std::string first = slurp(d / "out/doc.cxhm");
  REQUIRE(coex_run(args).code == 0);
  CHECK(slurp(d / "out/doc.cxhm") == first);
  CHECK(slurp(d / "out/metrics.jsonl") == metrics);
}

TEST_CASE("eval joins files and lists unjoined predictions") {
  TempDir d;
  write_corpus(d);
  REQUIRE(coex_run({"answer-prior", "--ocr", p(d, "ocr.jsonl"), "--qa", p(d, "qa.jsonl"), "--out",
                    p(d, "priors.jsonl")}).code == 0);
  spit(d / "pred.jsonl",
       R"({"qid":"q1","pred_text":"1234","pred_box":[0.1,0.1,0.5,0.2]})" "\n"
       R"({"qid":"q2","pred_text":"chris","pred_box":null})" "\n"
       R"({"qid":"zz","pred_text":"?"})" "\n");
  const Run r = coex_run({"eval", "--pred", p(d, "pred.jsonl"), "--qa", p(d, "qa.jsonl"), "--prior",
                          p(d, "priors.jsonl"), "--out", p(d, "report.json")});
  CHECK(r.code == 0);
  CHECK(r.err.find("zz") != std::string::npos);
  const io::json rep = io::json::parse(slurp(d / "report.json"));
  CHECK(rep["n"] == 2);
  CHECK(rep["unjoined"] == io::json::array({"zz"}));
  CHECK(rep["_meta"]["command"] == "eval");
  CHECK(fs::exists(d / "report.md"));
}

TEST_CASE("intervene is byte-identical at probability zero and across reruns") {
  TempDir d;
  Heatmap pred(4, 4), prior(4, 4);
  for (int i = 0; i < 16; ++i) {
    pred.data()[i] = (i * 7 % 16) / 16.0;
    prior.data()[i] = (i * 5 % 16) / 16.0;
  }
  io::write_heatmap(d / "pred/q1.cxhm", pred);
  io::write_heatmap(d / "prior/q1.cxhm", prior);
  io::write_embeddings(d / "emb/q1.cxem", EmbeddingGrid<float>::Ones(16, 2));

  REQUIRE(coex_run({"intervene", "--pred-dir", p(d, "pred"), "--prior-dir", p(d, "prior"),
                    "--out-dir", p(d, "zero"), "--prob", "0"}).code == 0);
  CHECK(slurp(d / "zero/q1.cxhm") == slurp(d / "pred/q1.cxhm"));

  const std::vector<std::string> args = {"intervene", "--pred-dir", p(d, "pred"), "--prior-dir",
                                         p(d, "prior"), "--out-dir", p(d, "a"), "--prob", "0.5",
                                         "--seed", "11", "--emb-dir", p(d, "emb"), "--mask-embeddings"};
  REQUIRE(coex_run(args).code == 0);
  auto args2 = args;
  args2[6] = p(d, "b");
  REQUIRE(coex_run(args2).code == 0);
  for (const char* f : {"q1.cxhm", "q1.cxem", "intervention_log.jsonl", "meta.json"})
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));

  REQUIRE(coex_run({"intervene", "--pred-dir", p(d, "pred"), "--prior-dir", p(d, "prior"),
                    "--out-dir", p(d, "full"), "--region", "overlap", "--prob", "1"}).code == 0);
  const Heatmap full = io::read_heatmap(d / "full/q1.cxhm");
  const MaskGrid ov = overlap_set(pred, prior, 0.7);
  for (int i = 0; i < 16; ++i)
    CHECK(full.data()[i] == (ov.data()[i] ? 0.0 : static_cast<double>(static_cast<float>(pred.data()[i]))));
}

TEST_CASE("gradcheck passes and its self-test fails") {
  const Run ok = coex_run({"gradcheck", "--samples", "10"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("giou") != std::string::npos);
  const Run bad = coex_run({"gradcheck", "--samples", "10", "--inject-wrong-sign"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("gradient check failed") != std::string::npos);
}

TEST_CASE("gate and condition commands") {
  TempDir d;
  EmbeddingGrid<float> e(4, 3);
  for (int i = 0; i < 12; ++i) e.data()[i] = 0.25f * i - 1.0f;
  io::write_embeddings(d / "e.cxem", e);
  io::write_heatmap(d / "ones.cxhm", Heatmap::Ones(2, 2));
  REQUIRE(coex_run({"gate", "--emb", p(d, "e.cxem"), "--mask", p(d, "ones.cxhm"), "--out",
                    p(d, "g.cxem"), "--variant", "linear", "--save-params", p(d, "gp.json")}).code == 0);
  CHECK(slurp(d / "g.cxem") == slurp(d / "e.cxem"));
  CHECK(fs::exists(d / "g.cxem.meta.json"));
  REQUIRE(coex_run({"gate", "--emb", p(d, "e.cxem"), "--mask", p(d, "ones.cxhm"), "--out",
                    p(d, "g2.cxem"), "--params", p(d, "gp.json")}).code == 0);
  CHECK(slurp(d / "g2.cxem") == slurp(d / "e.cxem"));
  io::write_heatmap(d / "three.cxhm", Heatmap::Ones(1, 3));
  CHECK(coex_run({"gate", "--emb", p(d, "e.cxem"), "--mask", p(d, "three.cxhm"), "--out",
                  p(d, "g3.cxem")}).code == 1);

  RasterPage page(8, 8, 1);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) page.planes[0](r, c) = static_cast<float>((r * 8 + c) / 63.0);
  io::write_raster(d / "page.cxim", page);
  REQUIRE(coex_run({"condition", "--page", p(d, "page.cxim"), "--box", "0,0,1,1", "--mode", "crop",
                    "--out", p(d, "crop.cxim")}).code == 0);
  CHECK((io::read_raster(d / "crop.cxim").planes[0] - page.planes[0]).abs().maxCoeff() < 1e-6f);
  REQUIRE(coex_run({"condition", "--page", p(d, "page.cxim"), "--box", "0,0,0.5,1", "--mode", "mask",
                    "--out", p(d, "mask.pgm")}).code == 0);
  CHECK(io::read_pnm(d / "mask.pgm").planes[0](0, 7) == 1.0f);
  const Run att = coex_run({"condition", "--page", p(d, "page.cxim"), "--box", "0.01,0.01,0.02,0.02",
                            "--mode", "attention", "--grid", "4x4", "--out", p(d, "att.cxhm")});
  REQUIRE(att.code == 0);
  CHECK(att.out.find("fallback") != std::string::npos);
  CHECK(io::read_heatmap(d / "att.cxhm").sum() == 1.0);
  CHECK(coex_run({"condition", "--page", p(d, "page.cxim"), "--box", "0.5,0,0.2,1", "--mode", "mask",
                  "--out", p(d, "x.cxim")}).code != 0);
  CHECK(coex_run({"condition", "--page", p(d, "page.cxim"), "--box", "0,0,1,1", "--mode", "blur",
                  "--out", p(d, "x.cxim")}).code != 0);
}
