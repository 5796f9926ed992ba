#include "kpforge/kpforge.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "config.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "extractor.hpp"
#include "json.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "reranker.hpp"
#include "stemmer.hpp"

struct kpf_config {
  kpforge::RunConfig value;
};

struct kpf_corpus {
  kpforge::Corpus value;
};

struct kpf_model {
  kpforge::RunConfig config;
  kpforge::Stage1Model stage1;
  std::optional<kpforge::RerankerModel> reranker;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
kpf_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return KPF_OK;
  } catch (const kpforge::Error& e) {
    last_error = e.what();
    return static_cast<kpf_status>(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return KPF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return KPF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) kpforge::usage_error(std::string(what) + " must not be null");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* len) {
  if (len) *len = s.size();
  if (!buf) return;
  if (cap <= s.size()) kpforge::usage_error("buffer too small: need " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Stemmed, deduplicated phrase keys.
std::vector<std::string> phrase_list(const char* const* items, size_t n) {
  if (n) need(items, "phrase array");
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    need(items[i], "phrase");
    auto key = kpforge::phrase_key(items[i]);
    if (!key.empty() && std::find(out.begin(), out.end(), key) == out.end()) out.push_back(std::move(key));
  }
  return out;
}

nlohmann::json scored(const std::vector<kpforge::ScoredPhrase>& list) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : list) arr.push_back({{"phrase", p.surface}, {"stemmed", p.stemmed}, {"score", p.score}});
  return arr;
}

}  // namespace

extern "C" {

const char* kpf_version(void) { return "0.1.0"; }

const char* kpf_status_name(kpf_status status) {
  switch (status) {
    case KPF_OK: return "ok";
    case KPF_ERR_USAGE: return "usage error";
    case KPF_ERR_DATA: return "data error";
    case KPF_ERR_NUMERIC: return "numeric error";
    case KPF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kpf_last_error(void) { return last_error.c_str(); }

void kpf_string_free(char* s) { std::free(s); }

kpf_status kpf_config_create(kpf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new kpf_config{};
  });
}

void kpf_config_destroy(kpf_config* config) { delete config; }

kpf_status kpf_config_load(kpf_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    std::ifstream in(path);
    if (!in) kpforge::usage_error(std::string("cannot read config file: ") + path);
    kpforge::parse_config(in, config->value, path);
  });
}

kpf_status kpf_config_set(kpf_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    kpforge::set_config_value(config->value, key, value);
  });
}

kpf_status kpf_config_get(const kpf_config* config, const char* key, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    copy_out(kpforge::get_config_value(config->value, key), buf, cap, len);
  });
}

kpf_status kpf_config_apply_env(kpf_config* config) {
  return guard([&] {
    need(config, "config");
    kpforge::apply_environment(config->value);
  });
}

kpf_status kpf_config_fingerprint(const kpf_config* config, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(config, "config");
    copy_out(kpforge::config_fingerprint(config->value), buf, cap, len);
  });
}

kpf_status kpf_config_serialize(const kpf_config* config, char** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = dup_string(kpforge::serialize_config(config->value));
  });
}

size_t kpf_config_key_count(void) { return kpforge::config_keys().size(); }

const char* kpf_config_key_name(size_t index) {
  const auto& keys = kpforge::config_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

size_t kpf_command_count(void) { return kpforge::command_names().size(); }

const char* kpf_command_name(size_t index) {
  const auto& names = kpforge::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

kpf_status kpf_run(const char* command, const kpf_config* config, kpf_message_fn sink, void* user) {
  return guard([&] {
    need(command, "command");
    need(config, "config");
    kpforge::MessageSink forward;
    if (sink) forward = [&](std::string_view line) { sink(std::string(line).c_str(), user); };
    kpforge::run_command(command, config->value, forward);
  });
}

kpf_status kpf_corpus_load(const char* path, kpf_corpus** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new kpf_corpus{kpforge::load_corpus(path)};
  });
}

void kpf_corpus_destroy(kpf_corpus* corpus) { delete corpus; }

size_t kpf_corpus_size(const kpf_corpus* corpus) { return corpus ? corpus->value.documents.size() : 0; }

size_t kpf_corpus_error_count(const kpf_corpus* corpus) { return corpus ? corpus->value.errors.size() : 0; }

kpf_status kpf_corpus_stats_compute(const kpf_corpus* corpus, kpf_corpus_stats* out) {
  return guard([&] {
    need(corpus, "corpus");
    need(out, "out");
    const auto s = kpforge::corpus_stats(corpus->value.documents);
    *out = {s.kp_mean, s.kp_stddev, s.kp_length, s.pct_absent, s.samples};
  });
}

kpf_status kpf_stem_word(const char* word, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(word, "word");
    copy_out(kpforge::stem_word(word), buf, cap, len);
  });
}

kpf_status kpf_stem_phrase(const char* phrase, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(phrase, "phrase");
    copy_out(kpforge::phrase_key(phrase), buf, cap, len);
  });
}

kpf_status kpf_f1_at_m(const char* const* predictions, size_t n_pred, const char* const* gold, size_t n_gold,
                       double* out) {
  return guard([&] {
    need(out, "out");
    *out = kpforge::f1_at_m(phrase_list(predictions, n_pred), phrase_list(gold, n_gold));
  });
}

kpf_status kpf_f1_at_5(const char* const* predictions, size_t n_pred, const char* const* gold, size_t n_gold,
                       double* out) {
  return guard([&] {
    need(out, "out");
    *out = kpforge::f1_at_5(phrase_list(predictions, n_pred), phrase_list(gold, n_gold));
  });
}

kpf_status kpf_model_load(const kpf_config* config, kpf_model** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    auto cfg = config->value;
    cfg.sync();
    if (cfg.stage1_checkpoint.empty()) kpforge::usage_error("stage1_checkpoint is not set");
    if (!cfg.present_threshold) kpforge::usage_error("present_threshold is not set; run calibrate first");
    auto model = std::make_unique<kpf_model>(kpf_model{cfg, kpforge::Stage1Model::load(cfg.stage1_checkpoint), {}});
    if (!cfg.reranker_checkpoint.empty()) {
      if (!cfg.absent_threshold) kpforge::usage_error("absent_threshold is not set; run calibrate first");
      model->reranker = kpforge::RerankerModel::load(cfg.reranker_checkpoint);
    }
    *out = model.release();
  });
}

void kpf_model_destroy(kpf_model* model) { delete model; }

kpf_status kpf_model_predict(const kpf_model* model, const char* title, const char* abstract_text, char** json_out) {
  return guard([&] {
    need(model, "model");
    need(title, "title");
    need(abstract_text, "abstract");
    need(json_out, "json_out");
    kpforge::LabeledDocument doc;
    doc.id = "input";
    doc.title = title;
    doc.abstract = abstract_text;
    const auto& cfg = model->config;
    const auto prepared = kpforge::prepare_document(doc, cfg.miner);
    nlohmann::json rec;
    rec["present"] = scored(kpforge::predict_present(model->stage1, prepared, *cfg.present_threshold, cfg.min_k));
    rec["absent"] = nlohmann::json::array();
    if (model->reranker) {
      const auto gen = kpforge::overgenerate(model->stage1, prepared.tokens, cfg.beam);
      rec["absent"] = scored(kpforge::predict_absent(*model->reranker, prepared.tokens.tokens, gen.candidates,
                                                     *cfg.absent_threshold, cfg.min_k));
    }
    *json_out = dup_string(rec.dump());
  });
}

}  // extern "C"
