#include "pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "corpus.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "extractor.hpp"
#include "generator.hpp"
#include "json.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "reranker.hpp"
#include "synth.hpp"

namespace kpforge {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

const std::string& require(const std::string& value, const char* key) {
  if (value.empty()) usage_error(std::string("missing required setting '") + key + "' (--" + key + ")");
  return value;
}

std::vector<LabeledDocument> read_documents(const std::string& path, const char* key, const MessageSink& sink) {
  require(path, key);
  if (!fs::exists(path)) data_error(std::string(key) + " file not found: " + path);
  Corpus corpus = load_corpus(path);
  for (const auto& e : corpus.errors)
    sink(path + ":" + std::to_string(e.line) + ": skipped record: " + e.message);
  return std::move(corpus.documents);
}

std::vector<PreparedDocument> prepare_all(std::span<const LabeledDocument> docs, const RunConfig& config) {
  std::vector<PreparedDocument> out(docs.size());
  parallel_for(docs.size(), config.jobs, [&](std::size_t i) { out[i] = prepare_document(docs[i], config.miner); });
  return out;
}

std::ofstream open_output(const std::string& path, const char* key) {
  require(path, key);
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::trunc);
  if (!out) data_error(std::string("cannot write ") + key + ": " + path);
  return out;
}

Stage1Model load_stage1(const RunConfig& config) {
  const auto& dir = require(config.stage1_checkpoint, "stage1_checkpoint");
  if (!fs::exists(dir)) data_error("stage-1 checkpoint not found: " + dir);
  return Stage1Model::load(dir);
}

RerankerModel load_reranker(const RunConfig& config) {
  const auto& dir = require(config.reranker_checkpoint, "reranker_checkpoint");
  if (!fs::exists(dir)) data_error("reranker checkpoint not found: " + dir);
  return RerankerModel::load(dir);
}

void write_train_log(const std::string& path, const TrainSummary& summary) {
  auto out = open_output(path, "log");
  out << "step,mle_loss,cl_loss,val_f1m\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt("%.9g", *v) : std::string(); };
  for (const auto& r : summary.log)
    out << r.step << ',' << cell(r.mle) << ',' << cell(r.cl) << ',' << cell(r.val_f1m) << '\n';
}

json summary_json(const TrainSummary& s) {
  json j = {{"steps", s.steps}, {"skipped_examples", s.skipped_examples}, {"early_stopped", s.early_stopped}};
  j["best_val_f1m"] = s.best_val_f1m ? json(*s.best_val_f1m) : json(nullptr);
  return j;
}

json scored_json(std::span<const ScoredPhrase> phrases) {
  json arr = json::array();
  for (const auto& p : phrases) arr.push_back({{"phrase", p.surface}, {"stemmed", p.stemmed}, {"score", p.score}});
  return arr;
}

// Overgenerated candidates keyed by document id, either read from a
// `generate` output file or produced on the fly.
std::map<std::string, std::vector<GeneratedPhrase>> read_candidates(const std::string& path) {
  if (!fs::exists(path)) data_error("candidates file not found: " + path);
  std::ifstream in(path);
  std::map<std::string, std::vector<GeneratedPhrase>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      auto& list = out[j.at("id").get<std::string>()];
      for (const auto& c : j.at("candidates")) {
        const auto surface = c.get<std::string>();
        list.push_back({surface, phrase_key(surface)});
      }
    } catch (const json::exception& e) {
      data_error(path + ":" + std::to_string(lineno) + ": malformed candidates record: " + e.what());
    }
  }
  return out;
}

std::vector<std::vector<GeneratedPhrase>> candidates_for(std::span<const PreparedDocument> docs,
                                                         const Stage1Model& stage1, const RunConfig& config) {
  std::vector<std::vector<GeneratedPhrase>> out(docs.size());
  if (!config.candidates.empty()) {
    auto by_id = read_candidates(config.candidates);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto it = by_id.find(docs[i].id);
      if (it == by_id.end())
        data_error("candidates file " + config.candidates + " has no record for document " + docs[i].id);
      out[i] = it->second;
    }
    return out;
  }
  parallel_for(docs.size(), config.jobs,
               [&](std::size_t i) { out[i] = overgenerate(stage1, docs[i].tokens, config.beam).candidates; });
  return out;
}

std::vector<RerankExample> rerank_examples(std::span<const PreparedDocument> docs,
                                           std::vector<std::vector<GeneratedPhrase>> candidates) {
  std::vector<RerankExample> out;
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back(make_rerank_example(docs[i], std::move(candidates[i])));
  return out;
}

// --- subcommands -----------------------------------------------------------

void cmd_synth(const RunConfig& config, const MessageSink& sink) {
  const fs::path dir(require(config.output, "output"));
  fs::create_directories(dir);
  SynthConfig sc;
  sc.seed = config.seed;
  const auto corpus = generate_synthetic(sc);
  write_corpus(dir / "train.jsonl", corpus.train);
  write_corpus(dir / "valid.jsonl", corpus.valid);
  write_corpus(dir / "test.jsonl", corpus.test);
  sink("wrote " + std::to_string(corpus.train.size()) + "/" + std::to_string(corpus.valid.size()) + "/" +
       std::to_string(corpus.test.size()) + " train/valid/test documents to " + dir.string());
}

void cmd_stats(const RunConfig& config, const MessageSink& sink) {
  const auto docs = read_documents(config.corpus, "corpus", sink);
  const auto s = corpus_stats(docs);
  sink("#KP_mu\t#KP_sigma\t|KP|_mu\t%absent\t#samples");
  sink(fmt("%.2f", s.kp_mean) + "\t" + fmt("%.2f", s.kp_stddev) + "\t" + fmt("%.2f", s.kp_length) + "\t" +
       fmt("%.2f", s.pct_absent) + "\t" + std::to_string(s.samples));
  if (!config.output.empty()) {
    auto out = open_output(config.output, "output");
    out << json({{"kp_mean", s.kp_mean},
                 {"kp_stddev", s.kp_stddev},
                 {"kp_length", s.kp_length},
                 {"pct_absent", s.pct_absent},
                 {"samples", s.samples}})
               .dump(1)
        << '\n';
  }
}

void cmd_mine(const RunConfig& config, const MessageSink& sink) {
  const auto docs = read_documents(config.corpus, "corpus", sink);
  const auto prepared = prepare_all(docs, config);
  const auto fp = config_fingerprint(config);
  auto out = open_output(config.output, "output");
  std::size_t total = 0, misses = 0;
  for (const auto& d : prepared) {
    json cands = json::array();
    std::map<std::string, bool> positive;
    for (const auto& p : d.labels.positives) positive[p.stemmed] = true;
    for (const auto& c : d.candidates)
      cands.push_back({{"start", c.start},
                       {"end", c.end},
                       {"surface", c.surface},
                       {"stemmed", c.stemmed},
                       {"is_positive", positive.contains(c.stemmed)}});
    total += d.candidates.size();
    misses += d.labels.misses.size();
    out << json({{"id", d.id}, {"fingerprint", fp}, {"candidates", cands}, {"misses", d.labels.misses}}).dump()
        << '\n';
  }
  sink("mined " + std::to_string(total) + " candidates from " + std::to_string(prepared.size()) +
       " documents; " + std::to_string(misses) + " gold present keyphrases missed");
}

void cmd_train(const RunConfig& config, const MessageSink& sink) {
  const auto& ckpt = require(config.stage1_checkpoint, "stage1_checkpoint");
  const auto train_docs = read_documents(config.corpus, "corpus", sink);
  std::vector<LabeledDocument> valid_docs;
  if (!config.valid_corpus.empty()) valid_docs = read_documents(config.valid_corpus, "valid_corpus", sink);
  const auto train = prepare_all(train_docs, config);
  const auto valid = prepare_all(valid_docs, config);

  auto result = train_stage1(train, valid, config.encoder, config.stage1);
  const auto fp = config_fingerprint(config);
  json meta = {{"training", summary_json(result.summary)},
               {"docs_without_positives", result.docs_without_positives},
               {"docs_without_absent", result.docs_without_absent}};
  result.model.save(ckpt, fp, meta);
  write_train_log(config.log.empty() ? (fs::path(ckpt) / "train_log.csv").string() : config.log, result.summary);
  sink("stage-1 training: " + std::to_string(result.summary.steps) + " steps, " +
       std::to_string(result.docs_without_positives) + " documents without contrastive positives");
  if (result.summary.best_val_f1m) sink("best validation F1@M " + fmt("%.4f", *result.summary.best_val_f1m));
  sink("saved checkpoint " + ckpt);
}

void cmd_generate(const RunConfig& config, const MessageSink& sink) {
  const auto model = load_stage1(config);
  const auto docs = read_documents(config.corpus, "corpus", sink);
  const auto prepared = prepare_all(docs, config);
  std::vector<Overgeneration> gen(prepared.size());
  parallel_for(prepared.size(), config.jobs,
               [&](std::size_t i) { gen[i] = overgenerate(model, prepared[i].tokens, config.beam); });
  const auto fp = config_fingerprint(config);
  auto out = open_output(config.output.empty() ? config.candidates : config.output, "output");
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    json cands = json::array(), beams = json::array();
    for (const auto& c : gen[i].candidates) cands.push_back(c.surface);
    for (const auto& b : gen[i].beams) beams.push_back({{"text", beam_text(b, model.vocab)}, {"logprob", b.log_prob}});
    out << json({{"id", prepared[i].id}, {"fingerprint", fp}, {"candidates", cands}, {"beams", beams}}).dump() << '\n';
  }
  sink("generated candidates for " + std::to_string(prepared.size()) + " documents");
}

void cmd_rerank_train(const RunConfig& config, const MessageSink& sink) {
  const auto& ckpt = require(config.reranker_checkpoint, "reranker_checkpoint");
  const auto stage1 = load_stage1(config);
  const auto train_docs = prepare_all(read_documents(config.corpus, "corpus", sink), config);
  std::vector<PreparedDocument> valid_docs;
  if (!config.valid_corpus.empty())
    valid_docs = prepare_all(read_documents(config.valid_corpus, "valid_corpus", sink), config);

  auto train = filter_rerank_examples(rerank_examples(train_docs, candidates_for(train_docs, stage1, config)));
  RunConfig valid_cfg = config;
  valid_cfg.candidates.clear();  // the candidates file belongs to the training documents
  auto valid = filter_rerank_examples(rerank_examples(valid_docs, candidates_for(valid_docs, stage1, valid_cfg)));
  sink("rerank corpus: " + std::to_string(train.examples.size()) + " documents kept, " +
       std::to_string(train.excluded) + " excluded without a correct candidate");

  auto result = train_stage2(train.examples, valid.examples, stage1.vocab, config.encoder, config.stage2);
  json meta = {{"training", summary_json(result.summary)},
               {"kept_documents", train.examples.size()},
               {"excluded_documents", train.excluded}};
  result.model.save(ckpt, config_fingerprint(config), meta);
  write_train_log(config.log.empty() ? (fs::path(ckpt) / "train_log.csv").string() : config.log, result.summary);
  if (result.summary.best_val_f1m) sink("best validation absent F1@M " + fmt("%.4f", *result.summary.best_val_f1m));
  sink("saved checkpoint " + ckpt);
}

void cmd_calibrate(const RunConfig& config, const MessageSink& sink) {
  const auto stage1 = load_stage1(config);
  const std::string& docs_path = config.valid_corpus.empty() ? config.corpus : config.valid_corpus;
  const auto docs = prepare_all(read_documents(docs_path, "valid_corpus", sink), config);

  RunConfig updated = config;
  updated.output.clear();  // the output path names this file, not a setting to carry forward
  updated.present_threshold = calibrate_threshold(present_calibration(stage1, docs, config.jobs));
  sink("present_threshold = " + fmt("%.17g", *updated.present_threshold));
  if (!config.reranker_checkpoint.empty()) {
    const auto reranker = load_reranker(config);
    const auto examples = rerank_examples(docs, candidates_for(docs, stage1, config));
    updated.absent_threshold = calibrate_threshold(absent_calibration(reranker, examples, config.jobs));
    sink("absent_threshold = " + fmt("%.17g", *updated.absent_threshold));
  }
  auto out = open_output(config.output, "output");
  out << "# calibrated run config\n" << serialize_config(updated);
  sink("wrote " + config.output);
}

void cmd_predict(const RunConfig& config, const MessageSink& sink) {
  const auto stage1 = load_stage1(config);
  if (!config.present_threshold) usage_error("present_threshold is not set; run calibrate first");
  std::optional<RerankerModel> reranker;
  if (!config.reranker_checkpoint.empty()) {
    reranker = load_reranker(config);
    if (!config.absent_threshold) usage_error("absent_threshold is not set; run calibrate first");
  }
  const auto docs = prepare_all(read_documents(config.corpus, "corpus", sink), config);
  std::vector<std::vector<GeneratedPhrase>> candidates;
  if (reranker) candidates = candidates_for(docs, stage1, config);

  std::vector<std::string> lines(docs.size());
  const auto fp = config_fingerprint(config);
  parallel_for(docs.size(), config.jobs, [&](std::size_t i) {
    json rec = {{"id", docs[i].id}, {"fingerprint", fp}};
    rec["present"] = scored_json(predict_present(stage1, docs[i], *config.present_threshold, config.min_k));
    rec["absent"] = json::array();
    if (reranker)
      rec["absent"] = scored_json(
          predict_absent(*reranker, docs[i].tokens.tokens, candidates[i], *config.absent_threshold, config.min_k));
    lines[i] = rec.dump();
  });
  auto out = open_output(config.output.empty() ? config.predictions : config.output, "output");
  for (const auto& l : lines) out << l << '\n';
  sink("wrote predictions for " + std::to_string(docs.size()) + " documents");
}

struct PredictionRecord {
  std::vector<std::string> present, absent;
};

std::map<std::string, PredictionRecord> read_predictions(const std::string& path) {
  if (!fs::exists(path)) data_error("predictions file not found: " + path);
  std::ifstream in(path);
  std::map<std::string, PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  auto phrases = [](const json& arr) {
    std::vector<std::string> v;
    for (const auto& p : arr) v.push_back(p.is_string() ? p.get<std::string>() : p.at("phrase").get<std::string>());
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      auto& rec = out[j.at("id").get<std::string>()];
      rec.present = phrases(j.value("present", json::array()));
      rec.absent = phrases(j.value("absent", json::array()));
    } catch (const json::exception& e) {
      data_error(path + ":" + std::to_string(lineno) + ": malformed prediction record: " + e.what());
    }
  }
  return out;
}

json metric_json(const MetricSummary& m) {
  json j = {{"f1_at_5", m.f1_at_5}, {"f1_at_m", m.f1_at_m}, {"documents", m.documents}};
  if (m.recall_at_n) j["recall_at_n"] = *m.recall_at_n;
  return j;
}

json doc_eval_json(const DocumentEval& e) {
  json j = {{"precision_at_m", e.at_m.precision}, {"recall_at_m", e.at_m.recall}, {"f1_at_m", e.at_m.f1},
            {"f1_at_5", e.at_5.f1},               {"predictions", e.predictions},  {"gold", e.gold}};
  if (e.recall_at_n) j["recall_at_n"] = *e.recall_at_n;
  return j;
}

void cmd_eval(const RunConfig& config, const MessageSink& sink) {
  const auto preds = read_predictions(require(config.predictions, "predictions"));
  const std::string& gold_path = config.gold.empty() ? config.corpus : config.gold;
  const auto docs = prepare_all(read_documents(gold_path, "gold", sink), config);
  std::map<std::string, std::vector<GeneratedPhrase>> cands;
  if (!config.candidates.empty()) cands = read_candidates(config.candidates);

  std::vector<DocumentEval> present, absent;
  json per_doc = json::array();
  for (const auto& d : docs) {
    auto it = preds.find(d.id);
    if (it == preds.end()) data_error("predictions have no record for document " + d.id);
    auto p = evaluate_document(d.id, normalize_phrases(it->second.present), d.present_gold);
    auto a = evaluate_document(d.id, normalize_phrases(it->second.absent), d.absent_gold);
    if (auto c = cands.find(d.id); c != cands.end()) {
      std::vector<std::string> stems;
      for (const auto& g : c->second) stems.push_back(g.stemmed);
      a.recall_at_n = recall_at_n(normalize_phrases(stems), d.absent_gold, config.recall_n);
    }
    per_doc.push_back({{"id", d.id}, {"present", doc_eval_json(p)}, {"absent", doc_eval_json(a)}});
    present.push_back(std::move(p));
    absent.push_back(std::move(a));
  }
  const auto mp = macro_average(present);
  const auto ma = macro_average(absent);
  json report = {{"fingerprint", config_fingerprint(config)},
                 {"recall_n", config.recall_n},
                 {"present", metric_json(mp)},
                 {"absent", metric_json(ma)},
                 {"documents", per_doc}};
  if (!config.output.empty()) {
    auto out = open_output(config.output, "output");
    out << report.dump(1) << '\n';
  }
  sink("set      docs  F1@5    F1@M    R@" + std::to_string(config.recall_n));
  auto row = [&](const char* name, const MetricSummary& m) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %4zu  %.4f  %.4f  %s", name, m.documents, m.f1_at_5, m.f1_at_m,
                  m.recall_at_n ? fmt("%.4f", *m.recall_at_n).c_str() : "-");
    sink(buf);
  };
  row("present", mp);
  row("absent", ma);
}

void cmd_dump_embeddings(const RunConfig& config, const MessageSink& sink) {
  const auto model = load_stage1(config);
  const auto docs = prepare_all(read_documents(config.corpus, "corpus", sink), config);
  std::vector<std::string> blocks(docs.size());
  parallel_for(docs.size(), config.jobs, [&](std::size_t i) {
    const auto& d = docs[i];
    if (d.tokens.tokens.empty()) return;
    Tape tape(false);
    Var hidden = model.encoder().encode(tape, model.vocab.ids(d.tokens.tokens));
    const Matrix zd = tape.value(model.doc_head().apply(tape, ops::row(tape, hidden, 0)));
    std::ostringstream os;
    auto emit = [&](const std::string& item, const char* kind, std::span<const double> v) {
      os << d.id << '\t' << item << '\t' << kind;
      for (double x : v) os << '\t' << fmt("%.9g", x);
      os << '\n';
    };
    emit(d.id, "document", zd.row(0));
    const bool has_gold = !d.present_gold.empty() || !d.absent_gold.empty();
    std::map<std::string, bool> positive;
    for (const auto& p : d.labels.positives) positive[p.stemmed] = true;
    const auto head = model.phrase_head();
    for (const auto& c : d.candidates) {
      Var z = head.apply(tape, ops::rows_sum(tape, hidden, c.start + 1, c.end + 1));
      const char* kind = !has_gold ? "candidate" : (positive.contains(c.stemmed) ? "positive" : "negative");
      emit(c.surface, kind, tape.value(z).row(0));
    }
    blocks[i] = os.str();
  });
  auto out = open_output(config.output, "output");
  out << "# config=" << config_fingerprint(config) << " checkpoint=" << model.fingerprint << '\n';
  out << "doc_id\titem\tkind";
  for (std::size_t k = 0; k < model.config.proj_dim; ++k) out << "\tz" << k;
  out << '\n';
  for (const auto& b : blocks) out << b;
  sink("wrote embeddings for " + std::to_string(docs.size()) + " documents");
}

using Handler = void (*)(const RunConfig&, const MessageSink&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"mine", cmd_mine},         {"train", cmd_train},           {"generate", cmd_generate},
      {"rerank-train", cmd_rerank_train}, {"calibrate", cmd_calibrate}, {"predict", cmd_predict},
      {"eval", cmd_eval},         {"stats", cmd_stats},           {"dump-embeddings", cmd_dump_embeddings},
      {"synth", cmd_synth},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

void run_command(const std::string& command, const RunConfig& config, const MessageSink& sink) {
  for (const auto& [name, fn] : handlers()) {
    if (name == command) {
      RunConfig synced = config;
      synced.sync();
      synced.miner.validate();
      fn(synced, sink ? sink : MessageSink([](std::string_view) {}));
      return;
    }
  }
  std::string valid;
  for (const auto& n : command_names()) valid += (valid.empty() ? "" : ", ") + n;
  usage_error("unknown command '" + command + "'; valid commands: " + valid);
}

}  // namespace kpforge
