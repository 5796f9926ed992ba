#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "error.hpp"
#include "hash.hpp"

namespace kpforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    usage_error("invalid number for " + key + ": '" + v + "'");
  return out;
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    usage_error("invalid non-negative integer for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  usage_error("invalid boolean for " + key + ": '" + v + "'");
}

enum class KeyKind { Path, Setting, Runtime };

struct KeyDef {
  std::string name;
  KeyKind kind;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
KeyDef uint_key(std::string name, T RunConfig::*outer) {
  return {name, KeyKind::Setting, [outer](const RunConfig& c) { return std::to_string(c.*outer); },
          [outer, name](RunConfig& c, const std::string& v) { c.*outer = parse_uint<T>(name, v); }};
}

KeyDef path_key(std::string name, std::string RunConfig::*field) {
  return {name, KeyKind::Path, [field](const RunConfig& c) { return c.*field; },
          [field](RunConfig& c, const std::string& v) { c.*field = v; }};
}

// Keys for a TrainConfig member; `pick` selects stage1 or stage2.
KeyDef train_double(std::string name, TrainConfig RunConfig::*stage, double TrainConfig::*field) {
  return {name, KeyKind::Setting, [=](const RunConfig& c) { return fmt_double((c.*stage).*field); },
          [=](RunConfig& c, const std::string& v) { (c.*stage).*field = parse_double(name, v); }};
}

KeyDef loop_double(std::string name, TrainConfig RunConfig::*stage, double TrainLoopConfig::*field) {
  return {name, KeyKind::Setting, [=](const RunConfig& c) { return fmt_double((c.*stage).loop.*field); },
          [=](RunConfig& c, const std::string& v) { (c.*stage).loop.*field = parse_double(name, v); }};
}

KeyDef loop_size(std::string name, TrainConfig RunConfig::*stage, std::size_t TrainLoopConfig::*field) {
  return {name, KeyKind::Setting, [=](const RunConfig& c) { return std::to_string((c.*stage).loop.*field); },
          [=](RunConfig& c, const std::string& v) {
            (c.*stage).loop.*field = parse_uint<std::size_t>(name, v);
          }};
}

KeyDef threshold_key(std::string name, std::optional<double> RunConfig::*field) {
  return {name, KeyKind::Setting,
          [=](const RunConfig& c) { return (c.*field) ? fmt_double(*(c.*field)) : std::string(); },
          [=](RunConfig& c, const std::string& v) {
            if (v.empty())
              (c.*field).reset();
            else
              c.*field = parse_double(name, v);
          }};
}

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = [] {
    using R = RunConfig;
    std::vector<KeyDef> t;
    t.push_back(path_key("corpus", &R::corpus));
    t.push_back(path_key("valid_corpus", &R::valid_corpus));
    t.push_back(path_key("gold", &R::gold));
    t.push_back(path_key("stage1_checkpoint", &R::stage1_checkpoint));
    t.push_back(path_key("reranker_checkpoint", &R::reranker_checkpoint));
    t.push_back(path_key("candidates", &R::candidates));
    t.push_back(path_key("predictions", &R::predictions));
    t.push_back(path_key("output", &R::output));
    t.push_back(path_key("log", &R::log));

    t.push_back({"max_ngram", KeyKind::Setting, [](const R& c) { return std::to_string(c.miner.max_ngram); },
                 [](R& c, const std::string& v) { c.miner.max_ngram = parse_uint<int>("max_ngram", v); }});
    t.push_back({"noun_phrases_only", KeyKind::Setting,
                 [](const R& c) { return std::string(c.noun_phrases_only ? "true" : "false"); },
                 [](R& c, const std::string& v) { c.noun_phrases_only = parse_bool("noun_phrases_only", v); }});
    t.push_back({"require_indep", KeyKind::Setting,
                 [](const R& c) { return std::string(c.miner.require_indep ? "true" : "false"); },
                 [](R& c, const std::string& v) { c.miner.require_indep = parse_bool("require_indep", v); }});

    t.push_back({"embed_dim", KeyKind::Setting, [](const R& c) { return std::to_string(c.encoder.embed_dim); },
                 [](R& c, const std::string& v) { c.encoder.embed_dim = parse_uint<std::size_t>("embed_dim", v); }});
    t.push_back({"proj_dim", KeyKind::Setting, [](const R& c) { return std::to_string(c.encoder.proj_dim); },
                 [](R& c, const std::string& v) { c.encoder.proj_dim = parse_uint<std::size_t>("proj_dim", v); }});
    t.push_back({"context_mixing", KeyKind::Setting,
                 [](const R& c) { return std::string(c.encoder.context_mixing ? "true" : "false"); },
                 [](R& c, const std::string& v) { c.encoder.context_mixing = parse_bool("context_mixing", v); }});

    t.push_back(train_double("tau", &R::stage1, &TrainConfig::tau));
    t.push_back(train_double("lambda", &R::stage1, &TrainConfig::lambda));
    t.push_back(loop_double("lr", &R::stage1, &TrainLoopConfig::lr));
    t.push_back(loop_double("weight_decay", &R::stage1, &TrainLoopConfig::weight_decay));
    t.push_back(loop_double("warmup", &R::stage1, &TrainLoopConfig::warmup));
    t.push_back(loop_size("batch_size", &R::stage1, &TrainLoopConfig::batch_size));
    t.push_back(loop_size("epochs", &R::stage1, &TrainLoopConfig::epochs));
    t.push_back(loop_size("max_tolerance", &R::stage1, &TrainLoopConfig::max_tolerance));
    t.push_back(loop_double("max_grad_norm", &R::stage1, &TrainLoopConfig::max_grad_norm));

    t.push_back(train_double("rerank_tau", &R::stage2, &TrainConfig::tau));
    t.push_back(loop_double("rerank_lr", &R::stage2, &TrainLoopConfig::lr));
    t.push_back(loop_double("rerank_weight_decay", &R::stage2, &TrainLoopConfig::weight_decay));
    t.push_back(loop_double("rerank_warmup", &R::stage2, &TrainLoopConfig::warmup));
    t.push_back(loop_size("rerank_batch_size", &R::stage2, &TrainLoopConfig::batch_size));
    t.push_back(loop_size("rerank_epochs", &R::stage2, &TrainLoopConfig::epochs));
    t.push_back(loop_size("rerank_max_tolerance", &R::stage2, &TrainLoopConfig::max_tolerance));
    t.push_back(loop_double("rerank_max_grad_norm", &R::stage2, &TrainLoopConfig::max_grad_norm));

    t.push_back({"beam_size", KeyKind::Setting, [](const R& c) { return std::to_string(c.beam.beam_size); },
                 [](R& c, const std::string& v) { c.beam.beam_size = parse_uint<std::size_t>("beam_size", v); }});
    t.push_back({"max_len", KeyKind::Setting, [](const R& c) { return std::to_string(c.beam.max_len); },
                 [](R& c, const std::string& v) { c.beam.max_len = parse_uint<std::size_t>("max_len", v); }});
    t.push_back({"length_norm", KeyKind::Setting,
                 [](const R& c) { return std::string(c.beam.length_normalize ? "true" : "false"); },
                 [](R& c, const std::string& v) { c.beam.length_normalize = parse_bool("length_norm", v); }});

    t.push_back(threshold_key("present_threshold", &R::present_threshold));
    t.push_back(threshold_key("absent_threshold", &R::absent_threshold));
    t.push_back(uint_key("min_k", &R::min_k));
    t.push_back(uint_key("recall_n", &R::recall_n));
    t.push_back(uint_key("seed", &R::seed));
    t.push_back({"jobs", KeyKind::Runtime, [](const R& c) { return std::to_string(c.jobs); },
                 [](R& c, const std::string& v) {
                   c.jobs = parse_uint<int>("jobs", v);
                   if (c.jobs < 1) usage_error("jobs must be >= 1");
                 }});
    return t;
  }();
  return table;
}

const KeyDef& find_key(const std::string& key) {
  for (const auto& k : key_table())
    if (k.name == key) return k;
  std::string valid;
  for (const auto& k : key_table()) valid += (valid.empty() ? "" : ", ") + k.name;
  usage_error("unknown config key '" + key + "'; valid keys: " + valid);
}

}  // namespace

RunConfig::RunConfig() {
  stage2.loop.warmup = 0.1;
  stage2.loop.lr = 5e-3;
  stage2.loop.epochs = 10;
  sync();
}

void RunConfig::sync() {
  miner.table = noun_phrases_only ? TagSetTable::noun_phrases_only() : TagSetTable::defaults();
  encoder.seed = seed;
  stage1.loop.seed = seed;
  stage2.loop.seed = seed;
  stage1.jobs = jobs;
  stage2.jobs = jobs;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_key(key).set(config, trim(value));
  config.sync();
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_key(key).get(config); }

void parse_config(std::istream& in, RunConfig& config, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      usage_error(source + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      usage_error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) usage_error("cannot read config file: " + path.string());
  RunConfig config;
  parse_config(in, config, path.string());
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

void apply_environment(RunConfig& config) {
  if (const char* s = std::getenv("KPFORGE_SEED"); s && *s) {
    try {
      set_config_value(config, "seed", s);
    } catch (const Error& e) {
      usage_error(std::string("KPFORGE_SEED: ") + e.what());
    }
  }
}

std::string config_fingerprint(const RunConfig& config) {
  std::uint64_t h = fnv1a64("kpforge-config-v1");
  for (const auto& k : key_table()) {
    if (k.kind != KeyKind::Setting) continue;
    h = fnv1a64(k.name + "=" + k.get(config) + "\n", h);
  }
  return hex64(h);
}

}  // namespace kpforge
