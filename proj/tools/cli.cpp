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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "coex/config.hpp"
#include "coex/gradcheck.hpp"
#include "coex/intervention.hpp"
#include "coex/io.hpp"
#include "coex/prior_eval.hpp"

namespace coex::cli {
namespace {

using io::json;
namespace fs = std::filesystem;

// -- shared plumbing ----------------------------------------------------------

/// Options every subcommand accepts.
struct Common {
  std::optional<std::string> config_file;
  std::optional<std::string> seed;
  std::optional<int> jobs;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file");
    cmd->add_option("--seed", seed, "RNG seed (overrides CX_SEED and config)");
    cmd->add_option("--jobs", jobs, "worker threads");
  }

  RunConfig resolve(const std::function<void(RunConfig&)>& flags) const {
    RunConfig c = RunConfig::load(config_file ? std::optional<fs::path>(*config_file) : std::nullopt);
    if (seed) c.seed = parse_seed(*seed);
    if (jobs) c.parallelism = *jobs;
    flags(c);
    c.validate();
    return c;
  }
};

template <typename T, typename U>
void set_if(const std::optional<T>& flag, U& field) {
  if (flag) field = static_cast<U>(*flag);
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Results land by index,
/// so output order never depends on scheduling. The lowest-index failure
/// is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<std::size_t> failed_at;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failed_at || i < *failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Files in `dir` with extension `ext`, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  require(fs::is_directory(dir), "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// First existing `dir/stem.<ext>` over the candidate extensions.
std::optional<fs::path> find_sibling(const fs::path& dir, const std::string& stem,
                                     std::initializer_list<const char*> exts) {
  for (const char* e : exts) {
    fs::path p = dir / (stem + e);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

void write_meta_sidecar(const fs::path& path, const json& meta) {
  io::write_file(path, meta.dump(2) + "\n");
}

fs::path sidecar_for(const fs::path& file) { return fs::path(file.string() + ".meta.json"); }

GridShape parse_grid(const std::string& s) {
  int r = 0, c = 0;
  char x = 0;
  std::istringstream in(s);
  require(static_cast<bool>(in >> r >> x >> c) && (x == 'x' || x == 'X') && in.eof() && r >= 1 &&
              c >= 1,
          "grid must look like ROWSxCOLS: " + s);
  return {r, c};
}

CornerBox parse_box(const std::string& s) {
  std::vector<double> v;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      require(used == part.size(), "trailing characters");
    } catch (const std::exception&) {
      throw Error("box must be x1,y1,x2,y2: " + s);
    }
  }
  require(v.size() == 4, "box must be x1,y1,x2,y2: " + s);
  return checked_box(v[0], v[1], v[2], v[3]);
}

std::string percent(int count, int total) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%5.1f%%", total ? 100.0 * count / total : 0.0);
  return buf;
}

// -- answer-prior ----------------------------------------------------------------

struct AnswerPriorArgs {
  Common common;
  std::string ocr, qa, out;
  std::optional<std::string> fallback_ocr;
  std::optional<double> tau_text, tau_dig, expand_x, expand_y;
};

void index_docs(const std::vector<OcrDocument>& docs, std::map<std::string, OcrDocument>& primary,
                std::map<std::string, OcrDocument>& fallback, bool force_fallback) {
  for (const auto& d : docs) {
    const bool fb = force_fallback || d.engine == OcrEngine::kFallback;
    auto& target = fb ? fallback : primary;
    require(!target.count(d.doc_id), "duplicate " + std::string(fb ? "fallback" : "primary") +
                                         " OCR document: " + d.doc_id);
    OcrDocument copy = d;
    if (fb) copy.engine = OcrEngine::kFallback;
    target.emplace(d.doc_id, std::move(copy));
  }
}

int cmd_answer_prior(const AnswerPriorArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve([&](RunConfig& c) {
    set_if(a.tau_text, c.thresholds.tau_text);
    set_if(a.tau_dig, c.thresholds.tau_dig);
    set_if(a.expand_x, c.expansion.fx);
    set_if(a.expand_y, c.expansion.fy);
  });

  std::map<std::string, OcrDocument> primary, fallback;
  index_docs(io::read_ocr(a.ocr), primary, fallback, false);
  if (a.fallback_ocr) index_docs(io::read_ocr(*a.fallback_ocr), primary, fallback, true);
  const std::vector<io::QaRecord> qa = io::read_qa(a.qa);

  std::vector<io::PriorRecord> results(qa.size());
  std::vector<std::string> warnings(qa.size());
  parallel_for(qa.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& q = qa[i];
    io::PriorRecord& r = results[i];
    r.qid = q.qid;
    const auto p = primary.find(q.doc_id);
    const auto f = fallback.find(q.doc_id);
    if (p == primary.end() && f == fallback.end()) {
      warnings[i] = "no OCR document for qid " + q.qid + " (doc_id " + q.doc_id + ")";
      return;
    }
    const OcrDocument* fb = f == fallback.end() ? nullptr : &f->second;
    const MatchResult m =
        p == primary.end()
            ? generate_prior(std::span<const std::string>(q.answers), *fb, nullptr, cfg.thresholds,
                             cfg.expansion)
            : generate_prior(std::span<const std::string>(q.answers), p->second, fb,
                             cfg.thresholds, cfg.expansion);
    r.box = m.box;
    r.reason = m.reason;
    r.engine = m.engine;
    r.score = m.score;
  });
  for (const auto& w : warnings)
    if (!w.empty()) err << "warning: " << w << '\n';

  std::vector<json> lines;
  std::map<MatchReason, int> hist;
  int via_fallback = 0;
  for (const auto& r : results) {
    lines.push_back(io::prior_to_json(r));
    ++hist[r.reason];
    if (r.engine == OcrEngine::kFallback) ++via_fallback;
  }
  json cfg_json = cfg.to_json();
  io::write_jsonl(a.out, io::make_metadata("answer-prior", cfg_json), lines);

  const int total = static_cast<int>(results.size());
  out << "match reasons (" << total << " records)\n";
  for (MatchReason reason : kAllReasons)
    out << "  " << std::left << std::setw(18) << to_string(reason) << std::right << std::setw(7)
        << hist[reason] << "  " << percent(hist[reason], total) << '\n';
  out << "  fallback engine used: " << via_fallback << '\n';
  return kOk;
}

// -- question-prior ----------------------------------------------------------------

struct QuestionPriorArgs {
  Common common;
  std::string sim, page, out;
  std::optional<std::string> gt, grid;
  bool no_postprocess = false;
  std::optional<int> patch_budget, variance_window;
  std::optional<double> border_frac, k_eval, sparsity_tau;
};

struct PriorJob {
  std::string id;
  fs::path sim, page, out;
};

json prior_metrics(const Heatmap& h, const CornerBox& box, const RunConfig& cfg) {
  const MaskGrid g = box_indicator(shape_of(h), box);
  const PrecisionRecall pr = precision_recall_at_k(h, g, cfg.k_eval);
  json m = {{"iou_soft", soft_iou(h, g)},
            {"p_at_k", pr.precision},
            {"r_at_k", pr.recall},
            {"sparsity", sparsity(h, cfg.sparsity_tau)},
            {"jsd", nullptr}};
  if (g.any() && h.sum() > 0) m["jsd"] = jsd(h, g);
  return m;
}

int cmd_question_prior(const QuestionPriorArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve([&](RunConfig& c) {
    set_if(a.patch_budget, c.patch_budget);
    set_if(a.variance_window, c.variance_window);
    set_if(a.border_frac, c.border_frac);
    set_if(a.k_eval, c.k_eval);
    set_if(a.sparsity_tau, c.sparsity_tau);
  });
  const std::optional<GridShape> forced_grid =
      a.grid ? std::optional<GridShape>(parse_grid(*a.grid)) : std::nullopt;

  const bool batch = fs::is_directory(a.sim);
  std::vector<PriorJob> jobs;
  if (batch) {
    require(fs::is_directory(a.page), "--page must be a directory when --sim is one");
    for (const auto& s : list_files(a.sim, ".cxsm")) {
      const std::string id = s.stem().string();
      const auto page = find_sibling(a.page, id, {".pgm", ".ppm", ".cxim"});
      if (!page) {
        err << "warning: no page for " << id << ", skipped\n";
        continue;
      }
      jobs.push_back({id, s, *page, fs::path(a.out) / (id + ".cxhm")});
    }
  } else {
    jobs.push_back({fs::path(a.sim).stem().string(), a.sim, a.page, a.out});
  }

  std::map<std::string, CornerBox> gt;
  if (a.gt)
    io::for_each_jsonl(*a.gt, [&](std::size_t, const json& j) {
      const std::string id =
          j.contains("doc_id") ? j.at("doc_id").get<std::string>() : j.at("qid").get<std::string>();
      gt[id] = io::box_from_json(j.at("box"));
    });

  std::vector<Heatmap> maps(jobs.size());
  parallel_for(jobs.size(), cfg.parallelism, [&](std::size_t i) {
    const SimilarityMatrix sim = io::read_similarity(jobs[i].sim);
    const GrayImage page = io::to_gray(io::load_page(jobs[i].page));
    const GridShape target =
        forced_grid ? *forced_grid
                    : patch_grid_for(static_cast<int>(page.cols()), static_cast<int>(page.rows()),
                                     cfg.patch_budget);
    Heatmap h = resample(aggregate_max(sim), {static_cast<int>(page.rows()),
                                              static_cast<int>(page.cols())}, target);
    if (!a.no_postprocess) h = postprocess(h, page, {cfg.variance_window, cfg.border_frac});
    maps[i] = std::move(h);
  });

  json cfg_json = cfg.to_json();
  cfg_json["postprocess"] = !a.no_postprocess;
  if (forced_grid) cfg_json["grid"] = *a.grid;
  const json meta = io::make_metadata("question-prior", cfg_json);
  std::vector<json> metrics;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    io::write_heatmap(jobs[i].out, maps[i]);
    if (!batch) write_meta_sidecar(sidecar_for(jobs[i].out), meta);
    if (const auto it = gt.find(jobs[i].id); it != gt.end()) {
      json m = prior_metrics(maps[i], it->second, cfg);
      m["doc_id"] = jobs[i].id;
      metrics.push_back(m);
    } else if (a.gt) {
      err << "warning: no ground-truth box for " << jobs[i].id << '\n';
    }
  }
  if (batch) write_meta_sidecar(fs::path(a.out) / "meta.json", meta);
  if (a.gt) {
    const fs::path mpath = batch ? fs::path(a.out) / "metrics.jsonl" : fs::path(a.out + ".metrics.jsonl");
    io::write_jsonl(mpath, meta, metrics);
  }
  out << "wrote " << jobs.size() << " heatmap(s)\n";
  return kOk;
}

// -- eval ------------------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred, qa, prior, out;
  std::optional<std::string> markdown;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve([](RunConfig&) {});
  std::map<std::string, io::QaRecord> qa;
  for (auto& r : io::read_qa(a.qa)) qa.emplace(r.qid, std::move(r));
  std::map<std::string, io::PriorRecord> priors;
  for (auto& r : io::read_priors(a.prior)) priors.emplace(r.qid, std::move(r));

  std::vector<PredictionRecord> records;
  std::vector<std::string> unjoined;
  for (const auto& p : io::read_predictions(a.pred)) {
    const auto q = qa.find(p.qid);
    if (q == qa.end()) {
      unjoined.push_back(p.qid);
      continue;
    }
    PredictionRecord r{p.qid, p.pred_text, p.pred_box, q->second.answers, std::nullopt};
    if (const auto pr = priors.find(p.qid); pr != priors.end()) r.gt_box = pr->second.box;
    records.push_back(std::move(r));
  }
  std::sort(unjoined.begin(), unjoined.end());
  for (const auto& id : unjoined) err << "warning: prediction " << id << " has no QA record\n";

  EvalReport rep = evaluate(records);
  rep.unjoined = unjoined;
  json doc = io::report_to_json(rep);
  doc["_meta"] = io::make_metadata("eval", cfg.to_json());
  io::write_file(a.out, doc.dump(2) + "\n");

  const std::string table = report_markdown(rep);
  const fs::path md = a.markdown ? fs::path(*a.markdown) : fs::path(a.out).replace_extension(".md");
  io::write_file(md, "<!-- coex " + std::string(io::kToolVersion) + " config " +
                         io::config_hash(cfg.to_json()) + " -->\n" + table);
  out << table;
  return kOk;
}

// -- intervene ----------------------------------------------------------------------------

struct InterveneArgs {
  Common common;
  std::string pred_dir, prior_dir, out_dir;
  std::optional<std::string> emb_dir;
  std::string region = "overlap";
  double prob = 1.0;
  bool mask_embeddings = false;
  std::optional<double> k;
};

int cmd_intervene(const InterveneArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve([&](RunConfig& c) { set_if(a.k, c.k_top); });
  InterventionSpec spec;
  spec.region = parse_region(a.region);
  spec.probability = a.prob;
  spec.mask_embeddings = a.mask_embeddings;
  spec.k = cfg.k_top;
  spec.rng_seed = cfg.seed;
  spec.validate();
  require(!a.mask_embeddings || a.emb_dir, "--mask-embeddings needs --emb-dir");

  struct Pair {
    std::string qid;
    fs::path pred, prior;
    std::optional<fs::path> emb;
  };
  std::vector<Pair> pairs;
  for (const auto& p : list_files(a.pred_dir, ".cxhm")) {
    const std::string qid = p.stem().string();
    const auto prior = find_sibling(a.prior_dir, qid, {".cxhm", ".json"});
    if (!prior) {
      err << "warning: no prior heatmap for " << qid << ", skipped\n";
      continue;
    }
    Pair pr{qid, p, *prior, std::nullopt};
    if (a.emb_dir) {
      pr.emb = find_sibling(*a.emb_dir, qid, {".cxem"});
      if (!pr.emb) {
        err << "warning: no embeddings for " << qid << ", skipped\n";
        continue;
      }
    }
    pairs.push_back(std::move(pr));
  }

  std::vector<InterventionResult> results(pairs.size());
  parallel_for(pairs.size(), cfg.parallelism, [&](std::size_t i) {
    const Heatmap pred = io::load_heatmap(pairs[i].pred);
    const Heatmap prior = io::load_heatmap(pairs[i].prior);
    std::optional<EmbeddingGrid<float>> emb;
    if (pairs[i].emb) emb = io::read_embeddings(*pairs[i].emb);
    results[i] = apply_intervention(pred, prior, emb ? &*emb : nullptr, spec, pairs[i].qid);
  });

  json cfg_json = cfg.to_json();
  cfg_json["region"] = std::string(to_string(spec.region));
  cfg_json["probability"] = spec.probability;
  cfg_json["mask_embeddings"] = spec.mask_embeddings;
  const json meta = io::make_metadata("intervene", cfg_json);
  std::vector<json> log;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const fs::path dir(a.out_dir);
    io::write_heatmap(dir / (pairs[i].qid + ".cxhm"), results[i].heatmap);
    if (results[i].embeddings) io::write_embeddings(dir / (pairs[i].qid + ".cxem"), *results[i].embeddings);
    log.push_back({{"qid", pairs[i].qid},
                   {"region", to_string(spec.region)},
                   {"probability", spec.probability},
                   {"selected", results[i].selected},
                   {"n_candidates", results[i].n_candidates}});
  }
  fs::create_directories(a.out_dir);
  io::write_jsonl(fs::path(a.out_dir) / "intervention_log.jsonl", meta, log);
  write_meta_sidecar(fs::path(a.out_dir) / "meta.json", meta);
  out << "intervened on " << pairs.size() << " heatmap(s)\n";
  return kOk;
}

// -- gradcheck ------------------------------------------------------------------------------

struct GradcheckArgs {
  Common common;
  int samples = 1000;
  double tolerance = 1e-4;
  bool inject_wrong_sign = false;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.common.resolve([](RunConfig&) {});
  require(a.samples >= 1, "--samples must be positive");
  const std::vector<std::pair<std::string, BoxLossFn>> suites = {
      {"giou", [](const CentreBox& p, const CentreBox& t) { return giou_loss(p, t); }},
      {"centre", [](const CentreBox& p, const CentreBox& t) { return centre_loss(p, t); }},
      {"area", [](const CentreBox& p, const CentreBox& t) { return area_loss(p, t); }},
  };
  std::function<void(BoxGrad&)> tamper;
  if (a.inject_wrong_sign)
    tamper = [](BoxGrad& g) {
      g.d_cx = -g.d_cx;
      g.d_cy = -g.d_cy;
      g.d_w = -g.d_w;
      g.d_h = -g.d_h;
    };

  bool ok = true;
  std::uint64_t seed = cfg.seed;
  for (const auto& [name, fn] : suites) {
    const GradSuiteResult r = check_gradients(name, fn, a.samples, seed++, tamper);
    const bool pass = r.max_rel_error <= a.tolerance;
    out << std::left << std::setw(8) << name << std::right << " samples=" << r.samples
        << " max_rel_error=" << std::scientific << std::setprecision(3) << r.max_rel_error
        << std::defaultfloat << (pass ? "  ok" : "  FAIL") << '\n';
    if (!pass) {
      ok = false;
      const auto& w = r.worst;
      json dump = {{"loss", name},
                   {"pred", {w.pred.cx, w.pred.cy, w.pred.w, w.pred.h}},
                   {"target", {w.target.cx, w.target.cy, w.target.w, w.target.h}},
                   {"analytic", w.analytic},
                   {"numeric", w.numeric},
                   {"rel_error", w.rel_error}};
      err << "gradient check failed: " << dump.dump() << '\n';
    }
  }
  return ok ? kOk : kFailure;
}

// -- gate ----------------------------------------------------------------------------------

struct GateArgs {
  Common common;
  std::string emb, mask, out;
  std::optional<std::string> params, variant, save_params;
  std::optional<double> alpha;
  std::optional<int> hidden;
};

int cmd_gate(const GateArgs& a, std::ostream& out, std::ostream&) {
  const RunConfig cfg = a.common.resolve([](RunConfig&) {});
  const EmbeddingGrid<float> e = io::read_embeddings(a.emb);
  const Heatmap m = io::load_heatmap(a.mask);

  GateParams p;
  const std::string params_path = a.params ? *a.params : cfg.gate_params;
  if (!params_path.empty()) {
    require(!a.variant, "--variant conflicts with a gate parameter file");
    json j;
    try {
      j = json::parse(io::read_file(params_path));
    } catch (const json::exception& ex) {
      throw Error(params_path + ": malformed gate parameters: " + ex.what());
    }
    p = io::gate_params_from_json(j);
  } else {
    p = GateParams::init(parse_gate_variant(a.variant.value_or("film")), static_cast<int>(e.cols()),
                         cfg.seed, a.hidden.value_or(0));
  }
  if (a.alpha) p.alpha = *a.alpha;
  p.validate();

  const EmbeddingGrid<float> gated = gate(e, m, p);
  io::write_embeddings(a.out, gated);
  json cfg_json = cfg.to_json();
  cfg_json["gate"] = {{"variant", to_string(p.variant)},
                      {"alpha", p.alpha},
                      {"epsilon", p.epsilon},
                      {"hidden", p.variant == GateVariant::kResidual ? p.transform.hidden_dim()
                                 : p.variant == GateVariant::kFilm   ? p.film_gamma.hidden_dim()
                                                                     : 0},
                      {"dropout", "omitted (inference)"},
                      {"activation", "gelu (erf)"}};
  write_meta_sidecar(sidecar_for(a.out), io::make_metadata("gate", cfg_json));
  if (a.save_params) io::write_file(*a.save_params, io::gate_params_to_json(p).dump(2) + "\n");
  out << "gated " << gated.rows() << "x" << gated.cols() << " embeddings (" << to_string(p.variant)
      << ")\n";
  return kOk;
}

// -- condition -----------------------------------------------------------------------------

struct ConditionArgs {
  Common common;
  std::string page, box, mode, out;
  std::optional<double> fill;
  std::optional<std::string> grid;
  std::optional<int> patch_budget;
};

void write_page(const fs::path& path, const RasterPage& p) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm") {
    require((ext == ".pgm") == (p.channels() == 1), "use .pgm for gray pages and .ppm for colour");
    io::write_pnm(path, p);
  } else {
    io::write_raster(path, p);
  }
}

int cmd_condition(const ConditionArgs& a, std::ostream& out, std::ostream&) {
  const RunConfig cfg = a.common.resolve([&](RunConfig& c) {
    set_if(a.fill, c.mask_fill);
    set_if(a.patch_budget, c.patch_budget);
  });
  const RasterPage page = io::load_page(a.page);
  const CornerBox box = parse_box(a.box);
  const GridShape grid =
      a.grid ? parse_grid(*a.grid) : patch_grid_for(page.width(), page.height(), cfg.patch_budget);

  json cfg_json = cfg.to_json();
  cfg_json["mode"] = a.mode;
  cfg_json["box"] = io::box_to_json(box);
  if (a.mode == "mask") {
    write_page(a.out, mask_reencode(page, box, cfg.mask_fill));
  } else if (a.mode == "crop") {
    write_page(a.out, crop_reencode(page, box));
  } else if (a.mode == "token-prune") {
    cfg_json["grid"] = {grid.rows, grid.cols};
    const MaskGrid m = token_prune_mask(grid, to_centre(box));
    io::write_heatmap(a.out, m.cast<double>());
    out << "kept " << m.count() << " of " << m.size() << " patches\n";
  } else if (a.mode == "attention") {
    cfg_json["grid"] = {grid.rows, grid.cols};
    const AttentionMask m = attention_mask(grid, box);
    cfg_json["fallback"] = m.fallback;
    io::write_heatmap(a.out, m.mask.cast<double>());
    out << "enabled " << m.mask.count() << " of " << m.mask.size() << " patches"
        << (m.fallback ? " (nearest-patch fallback)" : "") << '\n';
  } else {
    throw Error("unknown mode: " + a.mode + " (mask, crop, token-prune, attention)");
  }
  write_meta_sidecar(sidecar_for(a.out), io::make_metadata("condition", cfg_json));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"coex: explanation priors, losses, conditioning and evaluation"};
  app.name("coex");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));

  AnswerPriorArgs ap;
  auto* c_ap = app.add_subcommand("answer-prior", "match answers to OCR lines and emit prior boxes");
  ap.common.add(c_ap);
  c_ap->add_option("--ocr", ap.ocr, "OCR JSON-lines file")->required();
  c_ap->add_option("--qa", ap.qa, "QA JSON-lines file")->required();
  c_ap->add_option("--out", ap.out, "output prior JSON-lines file")->required();
  c_ap->add_option("--fallback-ocr", ap.fallback_ocr, "fallback-engine OCR file");
  c_ap->add_option("--tau-text", ap.tau_text, "fuzzy threshold on normalized text");
  c_ap->add_option("--tau-dig", ap.tau_dig, "fuzzy threshold on digit strings");
  c_ap->add_option("--expand-x", ap.expand_x, "relative width growth");
  c_ap->add_option("--expand-y", ap.expand_y, "relative height growth");

  QuestionPriorArgs qp;
  auto* c_qp = app.add_subcommand("question-prior", "similarity matrices to post-processed heatmaps");
  qp.common.add(c_qp);
  c_qp->add_option("--sim", qp.sim, "CXSM1 file or directory of <id>.cxsm")->required();
  c_qp->add_option("--page", qp.page, "page image or directory of <id>.pgm/.ppm/.cxim")->required();
  c_qp->add_option("--out", qp.out, "output CXHM1 file or directory")->required();
  c_qp->add_option("--gt", qp.gt, "JSON lines {doc_id, box} for the metrics sidecar");
  c_qp->add_option("--grid", qp.grid, "target grid ROWSxCOLS (default: from page and budget)");
  c_qp->add_flag("--no-postprocess", qp.no_postprocess, "emit the raw resampled heatmap");
  c_qp->add_option("--patch-budget", qp.patch_budget, "max patches when deriving the grid");
  c_qp->add_option("--variance-window", qp.variance_window, "odd local-variance window in pixels");
  c_qp->add_option("--border-frac", qp.border_frac, "suppressed border width as a page fraction");
  c_qp->add_option("--k-eval", qp.k_eval, "top-k fraction for P@K and R@K");
  c_qp->add_option("--sparsity-tau", qp.sparsity_tau, "sparsity threshold");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "ANLS, ACC and localization metrics");
  ev.common.add(c_ev);
  c_ev->add_option("--pred", ev.pred, "predictions JSON lines")->required();
  c_ev->add_option("--qa", ev.qa, "QA JSON lines")->required();
  c_ev->add_option("--prior", ev.prior, "answer-prior JSON lines (ground-truth boxes)")->required();
  c_ev->add_option("--out", ev.out, "report JSON")->required();
  c_ev->add_option("--markdown", ev.markdown, "markdown table (default: report path with .md)");

  InterveneArgs iv;
  auto* c_iv = app.add_subcommand("intervene", "mask heatmap patches against the prior");
  iv.common.add(c_iv);
  c_iv->add_option("--pred-dir", iv.pred_dir, "directory of predicted <qid>.cxhm")->required();
  c_iv->add_option("--prior-dir", iv.prior_dir, "directory of prior <qid>.cxhm")->required();
  c_iv->add_option("--out-dir", iv.out_dir, "output directory")->required();
  c_iv->add_option("--emb-dir", iv.emb_dir, "directory of <qid>.cxem embeddings");
  c_iv->add_option("--region", iv.region, "overlap or non_overlap")->capture_default_str();
  c_iv->add_option("--prob", iv.prob, "masking probability")->capture_default_str();
  c_iv->add_option("--k", iv.k, "top-k fraction for the overlap set");
  c_iv->add_flag("--mask-embeddings", iv.mask_embeddings, "also zero the selected embedding rows");

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "finite-difference check of the box-loss gradients");
  gc.common.add(c_gc);
  c_gc->add_option("--samples", gc.samples, "random pairs per loss")->capture_default_str();
  c_gc->add_option("--tolerance", gc.tolerance, "max relative error")->capture_default_str();
  c_gc->add_flag("--inject-wrong-sign", gc.inject_wrong_sign, "self-test: negate analytic gradients");

  GateArgs gt;
  auto* c_gt = app.add_subcommand("gate", "apply a mask gate to an embedding file");
  gt.common.add(c_gt);
  c_gt->add_option("--emb", gt.emb, "CXEM1 embeddings")->required();
  c_gt->add_option("--mask", gt.mask, "heatmap with one value per embedding row")->required();
  c_gt->add_option("--out", gt.out, "output CXEM1")->required();
  c_gt->add_option("--params", gt.params, "gate parameter JSON");
  c_gt->add_option("--variant", gt.variant, "linear, residual, spatial_attention or film");
  c_gt->add_option("--alpha", gt.alpha, "gate strength for linear and spatial attention");
  c_gt->add_option("--hidden", gt.hidden, "MLP hidden width for seeded parameters");
  c_gt->add_option("--save-params", gt.save_params, "write the parameters used");

  ConditionArgs cd;
  auto* c_cd = app.add_subcommand("condition", "condition a page on an answer box");
  cd.common.add(c_cd);
  c_cd->add_option("--page", cd.page, "PGM, PPM or CXIM1 page")->required();
  c_cd->add_option("--box", cd.box, "x1,y1,x2,y2 in relative coordinates")->required();
  c_cd->add_option("--mode", cd.mode, "mask, crop, token-prune or attention")->required();
  c_cd->add_option("--out", cd.out, "output page or CXHM1 patch mask")->required();
  c_cd->add_option("--fill", cd.fill, "background value for mask mode");
  c_cd->add_option("--grid", cd.grid, "patch grid ROWSxCOLS");
  c_cd->add_option("--patch-budget", cd.patch_budget, "max patches when deriving the grid");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadInput;
  }

  try {
    if (c_ap->parsed()) return cmd_answer_prior(ap, out, err);
    if (c_qp->parsed()) return cmd_question_prior(qp, out, err);
    if (c_ev->parsed()) return cmd_eval(ev, out, err);
    if (c_iv->parsed()) return cmd_intervene(iv, out, err);
    if (c_gc->parsed()) return cmd_gradcheck(gc, out, err);
    if (c_gt->parsed()) return cmd_gate(gt, out, err);
    if (c_cd->parsed()) return cmd_condition(cd, out, err);
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kBadInput;
}

}  // namespace coex::cli
